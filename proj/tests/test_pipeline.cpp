#include <gtest/gtest.h>

#include <sstream>

#include "hsom/hsom.hpp"
#include "test_helpers.hpp"

using namespace hsom;
using testing_support::labeled;
using testing_support::small_generator_config;
using testing_support::small_pipeline_config;

namespace {

ActionWindow window_of(const GeneratedSample& s) {
  ActionWindow w;
  w.t_start = 0;
  w.t_end = s.skeletons.back().t_ms;
  w.label = std::string(action_name(s.action));
  w.skeletons = s.skeletons;
  w.objects = s.objects;
  return w;
}

std::string stream_text(std::span<const Record> records) {
  std::ostringstream out;
  write_records(out, records);
  return out.str();
}

std::vector<ActionVerdict> replay(const RecognizerModel& m, const std::string& text,
                                  std::vector<Diagnostic>* diags = nullptr, StreamSummary* summary = nullptr) {
  std::vector<ActionVerdict> out;
  std::istringstream in(text);
  const auto s = run_online(
      m, in, [&](const ActionVerdict& v) { out.push_back(v); },
      [&](const Diagnostic& d) {
        if (diags) diags->push_back(d);
      });
  if (summary) *summary = s;
  return out;
}

std::string model_text(const RecognizerModel& m) {
  std::ostringstream out;
  save_model(m, out);
  return out.str();
}

}  // namespace

class TrainedPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    train_data_ = new GeneratedDataset(generate(small_generator_config(7, 4)));
    outcome_ = new TrainingOutcome(train_pipeline(labeled(*train_data_), small_pipeline_config(), 3));
  }
  static void TearDownTestSuite() {
    delete outcome_;
    delete train_data_;
  }
  static const RecognizerModel& model() { return outcome_->model; }

  static GeneratedDataset* train_data_;
  static TrainingOutcome* outcome_;
};

GeneratedDataset* TrainedPipeline::train_data_ = nullptr;
TrainingOutcome* TrainedPipeline::outcome_ = nullptr;

TEST_F(TrainedPipeline, ModelShapeInvariants) {
  const auto& m = model();
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.layer1.input_dim(), 9u);
  EXPECT_EQ(m.layer2.input_dim(), m.encoder.output_dim());
  EXPECT_EQ(m.output.input_dim(), m.layer2.size());
  EXPECT_EQ(m.labels(), (std::vector<std::string>{"Push", "Pull", "Put", "Lift", "Point"}));
  EXPECT_EQ(outcome_->predicted.size(), 20u);
  EXPECT_EQ(outcome_->ordered_vectors.size(), 20u);
}

TEST_F(TrainedPipeline, TrainingSetIsMemorized) {
  EXPECT_EQ(outcome_->predicted, outcome_->truth);
  const auto windows = labeled(*train_data_);
  for (const auto& w : windows) EXPECT_EQ(recognize(model(), w.window).label, w.label);
}

TEST_F(TrainedPipeline, DeterministicModelFile) {
  const auto again = train_pipeline(labeled(*train_data_), small_pipeline_config(), 3);
  EXPECT_EQ(model_text(again.model), model_text(model()));
  const auto other = train_pipeline(labeled(*train_data_), small_pipeline_config(), 4);
  EXPECT_NE(model_text(other.model), model_text(model()));
}

TEST_F(TrainedPipeline, SaveLoadRoundTrip) {
  const std::string text = model_text(model());
  std::istringstream in(text);
  const RecognizerModel back = load_model(in);
  EXPECT_EQ(model_text(back), text);
  EXPECT_EQ(back.layer1.weights(), model().layer1.weights());
  EXPECT_EQ(back.layer2.weights(), model().layer2.weights());
  EXPECT_EQ(back.output.weights(), model().output.weights());
  EXPECT_EQ(back.bounds.lo, model().bounds.lo);
  EXPECT_EQ(back.encoder, model().encoder);

  const auto probe = generate(small_generator_config(99, 2));
  const std::string stream = stream_text(probe.records);
  const auto a = replay(model(), stream);
  const auto b = replay(back, stream);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].same_decision(b[i]));
}

TEST_F(TrainedPipeline, ModelFormatErrors) {
  for (const std::string& bad : {std::string("not json"), std::string("{}"),
                                std::string(R"({"format": "other", "version": 1})")}) {
    std::istringstream in(bad);
    try {
      (void)load_model(in);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ModelFormat);
    }
  }
  auto j = model_to_json(model());
  j["format_version"] = 99;
  std::istringstream in(j.dump());
  EXPECT_THROW((void)load_model(in), Error);

  auto k = model_to_json(model());
  k["layer2"]["input_dim"] = 3;
  k["layer2"]["weights"] = std::vector<double>(3 * model().layer2.size(), 0.5);
  std::istringstream in2(k.dump());
  EXPECT_THROW((void)load_model(in2), Error);
}

TEST_F(TrainedPipeline, BatchAndOnlineAgree) {
  const auto test = generate(small_generator_config(55, 2));
  const auto windows = collect_windows(test.records);
  const auto online = replay(model(), stream_text(test.records));
  ASSERT_EQ(online.size(), windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto batch = recognize(model(), windows[i]);
    EXPECT_TRUE(batch.same_decision(online[i])) << i;
    const auto parallel = recognize(model(), windows[i], {.parallel_streams = true});
    EXPECT_TRUE(batch.same_decision(parallel)) << i;
    const auto single = replay(model(), stream_text(window_records(windows[i])));
    ASSERT_EQ(single.size(), 1u);
    EXPECT_TRUE(batch.same_decision(single[0]));
  }
}

TEST_F(TrainedPipeline, InterleavingDoesNotMatter) {
  const auto test = generate(small_generator_config(56, 1));
  Rng rng(5);
  for (const auto& w : collect_windows(test.records)) {
    const auto ref = recognize(model(), w);
    // Random merge of the two sub-streams that keeps each one's order.
    std::vector<Record> records{MarkRecord{w.t_start, MarkRecord::Edge::Start, w.label}};
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < w.skeletons.size() || j < w.objects.size()) {
      const bool take_skeleton = j == w.objects.size() || (i < w.skeletons.size() && rng.below(2) == 0);
      if (take_skeleton) {
        records.push_back(w.skeletons[i++]);
      } else {
        records.push_back(w.objects[j++]);
      }
    }
    records.push_back(MarkRecord{w.t_end, MarkRecord::Edge::End, std::nullopt});
    const auto got = replay(model(), stream_text(records));
    ASSERT_EQ(got.size(), 1u);
    EXPECT_TRUE(ref.same_decision(got[0]));
  }
}

TEST_F(TrainedPipeline, SpeedPairsGiveIdenticalOrderedVectors) {
  GeneratorConfig slow = small_generator_config(8, 1);
  slow.noise_stddev = 0.0;
  slow.speed_min = slow.speed_max = 0.5;
  GeneratorConfig fast = slow;
  fast.speed_min = fast.speed_max = 2.0;
  for (auto action : slow.actions) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto a = window_of(generate_sample(slow, action, i));
      const auto b = window_of(generate_sample(fast, action, i));
      EXPECT_EQ(a.skeletons.size(), 4 * b.skeletons.size());
      const auto wa = analyze_window(model(), a.skeletons);
      const auto wb = analyze_window(model(), b.skeletons);
      EXPECT_EQ(wa.ordered, wb.ordered);
      EXPECT_EQ(recognize(model(), a).label, recognize(model(), b).label);
    }
  }
}

TEST_F(TrainedPipeline, RunOnlineEdgeCases) {
  const auto test = generate(small_generator_config(57, 1));
  const auto windows = collect_windows(test.records);

  // Frames but no marks.
  std::vector<Record> unmarked;
  for (const auto& s : windows[0].skeletons) unmarked.push_back(s);
  StreamSummary summary;
  EXPECT_TRUE(replay(model(), stream_text(unmarked), nullptr, &summary).empty());
  EXPECT_EQ(summary.actions, 0u);
  EXPECT_EQ(summary.discarded_frames, unmarked.size());
  EXPECT_EQ(summary.mean_latency_ms, 0.0);

  EXPECT_TRUE(replay(model(), "").empty());

  // One window.
  EXPECT_EQ(replay(model(), stream_text(window_records(windows[0]))).size(), 1u);

  // Stray end mark, then a malformed line, then a good window: the stream continues.
  std::string text = R"({"t": 0, "kind": "mark", "action": "end"})" "\n" "{garbage\n";
  text += stream_text(window_records(windows[1]));
  std::vector<Diagnostic> diags;
  const auto verdicts = replay(model(), text, &diags, &summary);
  ASSERT_EQ(verdicts.size(), 1u);
  ASSERT_EQ(diags.size(), 2u);
  EXPECT_EQ(diags[0].kind, ErrorKind::UnbalancedMarks);
  EXPECT_EQ(diags[0].line, 1u);
  EXPECT_EQ(diags[1].kind, ErrorKind::MalformedRecord);
  EXPECT_EQ(diags[1].line, 2u);
  EXPECT_EQ(summary.malformed, 1u);
  EXPECT_EQ(summary.unbalanced, 1u);
  EXPECT_EQ(summary.actions, 1u);
  EXPECT_GE(summary.p95_latency_ms, 0.0);

  // A window with only marks cannot be recognized.
  const std::string empty_window =
      R"({"t": 0, "kind": "mark", "action": "start"})" "\n" R"({"t": 5, "kind": "mark", "action": "end"})" "\n";
  diags.clear();
  EXPECT_TRUE(replay(model(), empty_window, &diags, &summary).empty());
  EXPECT_EQ(summary.failed_windows, 1u);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, ErrorKind::EmptyWindow);
}

TEST_F(TrainedPipeline, DegenerateFramesAreSkipped) {
  const auto test = generate(small_generator_config(58, 1));
  auto w = collect_windows(test.records)[0];
  const auto ref = recognize(model(), w);
  auto bad = w.skeletons.front();
  bad[JointId::LeftHip] = bad[JointId::RightHip];
  w.skeletons.insert(w.skeletons.begin() + 1, bad);
  const auto v = recognize(model(), w);
  EXPECT_EQ(v.label, ref.label);
  EXPECT_EQ(v.object_id, ref.object_id);

  ActionWindow all_bad = w;
  all_bad.skeletons.assign(3, bad);
  try {
    (void)recognize(model(), all_bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSkeleton);
  }
}

TEST_F(TrainedPipeline, WindowWithoutObjectsHasNoTarget) {
  const auto test = generate(small_generator_config(59, 1));
  auto w = collect_windows(test.records)[0];
  w.objects.clear();
  const auto v = recognize(model(), w);
  EXPECT_FALSE(v.object_id.has_value());
  EXPECT_TRUE(v.object_scores.empty());
  EXPECT_TRUE(to_json(v)["object_id"].is_null());
}

TEST_F(TrainedPipeline, VerdictJsonRoundTrip) {
  const auto test = generate(small_generator_config(60, 1));
  for (const auto& w : collect_windows(test.records)) {
    const auto v = recognize(model(), w);
    const auto j = to_json(v);
    for (const char* key : {"label", "activations", "object_id", "object_scores", "t_start", "t_end", "latency_ms"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    const auto back = verdict_from_json(nlohmann::ordered_json::parse(j.dump()));
    EXPECT_TRUE(v.same_decision(back));
    // Label is the argmax of the activations; target is the argmin of the scores.
    const auto best = std::max_element(v.activations.begin(), v.activations.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    EXPECT_EQ(best->first, v.label);
    const auto nearest = std::min_element(v.object_scores.begin(), v.object_scores.end(),
                                          [](const auto& a, const auto& b) { return a.second < b.second; });
    EXPECT_EQ(nearest->first, v.object_id);
  }
}

TEST(TrainPipeline, SingleClassSingleSample) {
  GeneratorConfig g = small_generator_config(1, 1);
  g.actions = {ActionKind::Lift};
  const auto data = generate(g);
  const auto out = train_pipeline(labeled(data), small_pipeline_config(), 1);
  EXPECT_EQ(out.predicted, out.truth);
  EXPECT_EQ(out.supervised_accuracy.back(), 1.0);
  EXPECT_EQ(out.model.labels(), (std::vector<std::string>{"Lift"}));
}

TEST(TrainPipeline, LabelErrors) {
  const auto data = generate(small_generator_config(2, 1));
  const auto windows = labeled(data);
  EXPECT_THROW((void)train_pipeline(std::span<const LabeledWindow>{}, small_pipeline_config(), 1), Error);

  auto config = small_pipeline_config();
  config.labels = {"Push", "Pull", "Put", "Lift"};
  try {
    (void)train_pipeline(windows, config, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownLabel);
  }
  config.labels = {"Push", "Pull", "Put", "Lift", "Point", "Wave"};
  try {
    (void)train_pipeline(windows, config, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingLabel);
  }
  config.labels = {"Point", "Lift", "Put", "Pull", "Push"};
  EXPECT_EQ(train_pipeline(windows, config, 1).model.labels(), config.labels);
}
