#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hsom/errors.hpp"
#include "hsom/model.hpp"
#include "hsom/objects.hpp"
#include "hsom/records.hpp"
#include "hsom/rng.hpp"
#include "hsom/skeleton.hpp"
#include "hsom/som.hpp"
#include "hsom/supervised.hpp"
#include "hsom/trajectory.hpp"
#include "hsom/window.hpp"

namespace hsom {

// Sub-seed streams derived from the master training seed.
enum SeedStream : std::uint64_t {
  kSeedLayer1Init = 1,
  kSeedLayer1Order = 2,
  kSeedLayer2Init = 3,
  kSeedLayer2Order = 4,
  kSeedOutputInit = 5,
  kSeedOutputOrder = 6,
};

// Rescale + egocentric transform of every frame; degenerate frames are skipped.
inline std::vector<SkeletonFrame> preprocess_frames(std::span<const SkeletonFrame> frames) {
  std::vector<SkeletonFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    try {
      out.push_back(preprocess(f));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSkeleton && e.kind() != ErrorKind::DegenerateTriangle) throw;
    }
  }
  return out;
}

// Every intermediate product of the action stream for one window.
struct WindowAnalysis {
  std::size_t frames_used{0};
  std::vector<GridCoord> winners;
  ActivityTrace trace;
  OrderedVector ordered;
  GridCoord layer2_winner;
  std::vector<double> layer2_activity;  // supervised-layer input
  LabelDistribution distribution;
};

inline std::vector<GridCoord> layer1_winners(const RecognizerModel& model, std::span<const SkeletonFrame> preprocessed) {
  std::vector<GridCoord> winners;
  winners.reserve(preprocessed.size());
  for (const auto& f : preprocessed) {
    winners.push_back(respond(model.layer1, attend(f, model.config.attention, model.bounds)).winner);
  }
  return winners;
}

inline WindowAnalysis analyze_window(const RecognizerModel& model, std::span<const SkeletonFrame> skeletons) {
  if (skeletons.empty()) throw Error(ErrorKind::EmptyWindow, "window has no skeleton frames");
  const auto frames = preprocess_frames(skeletons);
  if (frames.empty()) throw Error(ErrorKind::DegenerateSkeleton, "every skeleton frame in the window is degenerate");

  WindowAnalysis a;
  a.frames_used = frames.size();
  a.winners = layer1_winners(model, frames);
  a.trace = record_trace(a.winners, model.layer1.rows(), model.layer1.cols(), model.config.dedup);
  a.ordered = encode(a.trace, model.encoder);
  const auto net = net_input(model.layer2, a.ordered);
  a.layer2_winner = winner(activity(net, model.layer2.activity_sigma()), model.layer2.cols());
  a.layer2_activity = activity(net, model.config.supervised_activity_sigma);
  a.distribution = activate(model.output, a.layer2_activity);
  return a;
}

// Pairs each object frame with the skeleton frame nearest in time (earlier on ties).
inline std::vector<SceneFrame> pair_scene_frames(std::span<const SkeletonFrame> skeletons,
                                                 std::span<const ObjectFrame> objects) {
  std::vector<SceneFrame> scene;
  if (skeletons.empty()) return scene;
  scene.reserve(objects.size());
  for (const auto& of : objects) {
    const SkeletonFrame* best = nullptr;
    std::int64_t best_dt = 0;
    for (const auto& sf : skeletons) {
      const std::int64_t dt = sf.t_ms > of.t_ms ? sf.t_ms - of.t_ms : of.t_ms - sf.t_ms;
      if (best == nullptr || dt < best_dt || (dt == best_dt && sf.t_ms < best->t_ms)) {
        best = &sf;
        best_dt = dt;
      }
    }
    scene.push_back({*best, of});
  }
  return scene;
}

inline bool usable(const SkeletonFrame& f) {
  try {
    (void)body_transform(f);
    return true;
  } catch (const Error&) {
    return false;
  }
}

inline std::optional<TargetResolution> resolve_window_target(const RecognizerModel& model,
                                                             std::span<const SkeletonFrame> skeletons,
                                                             std::span<const ObjectFrame> objects) {
  std::vector<SkeletonFrame> good;
  for (const auto& f : skeletons) {
    if (usable(f)) good.push_back(f);
  }
  const auto scene = pair_scene_frames(good, objects);
  if (scene.empty()) return std::nullopt;
  return resolve_target(scene, model.config.hand, model.config.aggregation);
}

struct ActionVerdict {
  std::string label;
  std::vector<std::pair<std::string, double>> activations;  // canonical label order
  std::optional<int> object_id;
  std::map<int, double> object_scores;
  std::int64_t t_start{0};
  std::int64_t t_end{0};
  std::size_t frame_count{0};
  double latency_ms{0.0};

  // Everything except the wall-clock latency.
  bool same_decision(const ActionVerdict& o) const {
    return label == o.label && activations == o.activations && object_id == o.object_id &&
           object_scores == o.object_scores && t_start == o.t_start && t_end == o.t_end &&
           frame_count == o.frame_count;
  }
};

inline nlohmann::ordered_json to_json(const ActionVerdict& v) {
  nlohmann::ordered_json j;
  j["label"] = v.label;
  nlohmann::ordered_json acts = nlohmann::ordered_json::object();
  for (const auto& [l, y] : v.activations) acts[l] = y;
  j["activations"] = std::move(acts);
  j["object_id"] = v.object_id ? nlohmann::ordered_json(*v.object_id) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json scores = nlohmann::ordered_json::object();
  for (const auto& [id, s] : v.object_scores) scores[std::to_string(id)] = s;
  j["object_scores"] = std::move(scores);
  j["t_start"] = v.t_start;
  j["t_end"] = v.t_end;
  j["frames"] = v.frame_count;
  j["latency_ms"] = v.latency_ms;
  return j;
}

inline ActionVerdict verdict_from_json(const nlohmann::ordered_json& j) {
  ActionVerdict v;
  v.label = j.at("label").get<std::string>();
  for (const auto& [k, y] : j.at("activations").items()) v.activations.emplace_back(k, y.get<double>());
  if (!j.at("object_id").is_null()) v.object_id = j.at("object_id").get<int>();
  for (const auto& [k, s] : j.at("object_scores").items()) v.object_scores[std::stoi(k)] = s.get<double>();
  v.t_start = j.at("t_start").get<std::int64_t>();
  v.t_end = j.at("t_end").get<std::int64_t>();
  v.frame_count = j.value("frames", std::size_t{0});
  v.latency_ms = j.value("latency_ms", 0.0);
  return v;
}

struct RecognizeOptions {
  // Run the object stream on a second thread; results are identical either way.
  bool parallel_streams{false};
};

// Merges the action stream and the object stream for one window.
inline ActionVerdict recognize(const RecognizerModel& model, const ActionWindow& window, RecognizeOptions opts = {}) {
  if (window.skeletons.empty()) throw Error(ErrorKind::EmptyWindow, "window has no skeleton frames");

  const auto objects_fold = [&]() { return resolve_window_target(model, window.skeletons, window.objects); };
  std::optional<TargetResolution> target;
  std::future<std::optional<TargetResolution>> pending;
  if (opts.parallel_streams) {
    pending = std::async(std::launch::async, objects_fold);
  } else {
    target = objects_fold();
  }
  const WindowAnalysis a = analyze_window(model, window.skeletons);
  if (pending.valid()) target = pending.get();

  ActionVerdict v;
  v.label = model.labels()[a.distribution.predicted];
  for (std::size_t c = 0; c < model.labels().size(); ++c) {
    v.activations.emplace_back(model.labels()[c], a.distribution.activations[c]);
  }
  if (target) {
    v.object_id = target->object_id;
    v.object_scores = target->per_object_scores;
  }
  v.t_start = window.t_start;
  v.t_end = window.t_end;
  v.frame_count = a.frames_used;
  return v;
}

// ---------------------------------------------------------------------------
// Training.

struct LabeledWindow {
  ActionWindow window;
  std::string label;
};

struct TrainingOutcome {
  RecognizerModel model;
  std::vector<double> layer1_quantization_error;
  std::vector<double> layer2_quantization_error;
  std::vector<double> supervised_accuracy;
  std::vector<std::string> predicted;  // per training window, after training
  std::vector<std::string> truth;
  std::vector<std::vector<double>> ordered_vectors;  // per training window
};

inline std::vector<std::string> resolve_labels(const PipelineConfig& config, std::span<const LabeledWindow> data) {
  std::vector<std::string> labels = config.labels;
  if (labels.empty()) {
    for (const auto& w : data) {
      if (std::find(labels.begin(), labels.end(), w.label) == labels.end()) labels.push_back(w.label);
    }
    return labels;
  }
  for (const auto& w : data) {
    if (std::find(labels.begin(), labels.end(), w.label) == labels.end()) {
      throw Error(ErrorKind::UnknownLabel, "training label '" + w.label + "' is not in the configured label list");
    }
  }
  for (const auto& l : labels) {
    const bool present = std::any_of(data.begin(), data.end(), [&](const LabeledWindow& w) { return w.label == l; });
    if (!present) throw Error(ErrorKind::MissingLabel, "label '" + l + "' has no training sample");
  }
  return labels;
}

// Phase 1 trains layer 1 on all pooled postures. Phase 2 freezes it, encodes
// one ordered vector per window, trains layer 2 on those and finally the
// output layer on layer-2 activity maps.
inline TrainingOutcome train_pipeline(std::span<const LabeledWindow> data, const PipelineConfig& config,
                                      std::uint64_t seed) {
  if (data.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training windows");
  const auto labels = resolve_labels(config, data);

  std::vector<std::vector<SkeletonFrame>> frames;
  frames.reserve(data.size());
  std::vector<SkeletonFrame> pooled;
  for (const auto& w : data) {
    if (w.window.skeletons.empty()) throw Error(ErrorKind::EmptyWindow, "training window has no skeleton frames");
    frames.push_back(preprocess_frames(w.window.skeletons));
    if (frames.back().empty()) {
      throw Error(ErrorKind::DegenerateSkeleton, "every skeleton frame of a training window is degenerate");
    }
    pooled.insert(pooled.end(), frames.back().begin(), frames.back().end());
  }

  NormalizationBounds bounds = fit_bounds(pooled, config.attention);
  std::vector<std::vector<double>> postures;
  postures.reserve(pooled.size());
  for (const auto& f : pooled) postures.push_back(attend(f, config.attention, bounds));

  TrainingOutcome out{RecognizerModel{config, seed, std::move(bounds),
                                      SomGrid(config.layer1.rows, config.layer1.cols, postures.front().size(),
                                              config.layer1.activity_sigma, derive_seed(seed, kSeedLayer1Init)),
                                      EncoderModel{}, SomGrid(1, 1, 1, 1.0, 0),
                                      SupervisedLayer(labels, 1, config.beta, 0, config.error_sign)},
                      {}, {}, {}, {}, {}, {}};
  RecognizerModel& m = out.model;
  m.config.labels = labels;

  auto l1 = train(std::move(m.layer1), postures, config.layer1.schedule(postures.size()),
                  derive_seed(seed, kSeedLayer1Order));
  m.layer1 = std::move(l1.grid);
  out.layer1_quantization_error = std::move(l1.quantization_error);

  std::vector<ActivityTrace> traces;
  traces.reserve(data.size());
  for (const auto& f : frames) {
    traces.push_back(record_trace(layer1_winners(m, f), m.layer1.rows(), m.layer1.cols(), config.dedup));
  }
  m.encoder = fit_nmax(traces, m.layer1.rows(), m.layer1.cols());
  out.ordered_vectors.reserve(traces.size());
  for (const auto& t : traces) out.ordered_vectors.push_back(encode(t, m.encoder));

  auto l2 = train(SomGrid(config.layer2.rows, config.layer2.cols, m.encoder.output_dim(), config.layer2.activity_sigma,
                          derive_seed(seed, kSeedLayer2Init)),
                  out.ordered_vectors, config.layer2.schedule(out.ordered_vectors.size()),
                  derive_seed(seed, kSeedLayer2Order));
  m.layer2 = std::move(l2.grid);
  out.layer2_quantization_error = std::move(l2.quantization_error);

  std::vector<SupervisedSample> samples;
  samples.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto net = net_input(m.layer2, out.ordered_vectors[i]);
    const auto it = std::find(labels.begin(), labels.end(), data[i].label);
    samples.push_back({activity(net, config.supervised_activity_sigma), static_cast<std::size_t>(it - labels.begin())});
  }
  auto sup = train(SupervisedLayer(labels, m.layer2.size(), config.beta, derive_seed(seed, kSeedOutputInit),
                                   config.error_sign),
                   samples, config.supervised_epochs, derive_seed(seed, kSeedOutputOrder));
  m.output = std::move(sup.layer);
  out.supervised_accuracy = std::move(sup.accuracy);
  m.validate();

  for (std::size_t i = 0; i < data.size(); ++i) {
    out.truth.push_back(data[i].label);
    out.predicted.push_back(labels[activate(m.output, samples[i].input).predicted]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Online runtime.

struct Diagnostic {
  std::size_t line{0};
  ErrorKind kind{ErrorKind::MalformedRecord};
  std::string message;
};

struct StreamSummary {
  std::size_t records{0};
  std::size_t actions{0};
  std::size_t malformed{0};
  std::size_t unbalanced{0};
  std::size_t failed_windows{0};
  std::size_t discarded_frames{0};
  double mean_latency_ms{0.0};
  double p95_latency_ms{0.0};
  double max_latency_ms{0.0};
  std::vector<double> latencies_ms;
};

inline nlohmann::ordered_json to_json(const StreamSummary& s) {
  return {{"records", s.records},
          {"actions", s.actions},
          {"malformed", s.malformed},
          {"unbalanced", s.unbalanced},
          {"failed_windows", s.failed_windows},
          {"discarded_frames", s.discarded_frames},
          {"mean_latency_ms", s.mean_latency_ms},
          {"p95_latency_ms", s.p95_latency_ms},
          {"max_latency_ms", s.max_latency_ms}};
}

// Buffers frames between marks and emits one verdict per closed window.
// One instance serves one stream; the model is shared read-only.
class OnlineRecognizer {
 public:
  using Clock = std::chrono::steady_clock;

  explicit OnlineRecognizer(const RecognizerModel& model, RecognizeOptions opts = {}) : model_(&model), opts_(opts) {}

  // `received` is when the record arrived; latency is measured from it.
  std::optional<ActionVerdict> feed(const Record& record, Clock::time_point received = Clock::now(),
                                    std::size_t line = 0) {
    ++summary_.records;
    std::optional<ActionWindow> done;
    try {
      done = assembler_.push(record);
    } catch (const Error& e) {
      ++summary_.unbalanced;
      report(line, e);
      return std::nullopt;
    }
    if (!done) return std::nullopt;
    try {
      ActionVerdict v = recognize(*model_, *done, opts_);
      v.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - received).count();
      ++summary_.actions;
      summary_.latencies_ms.push_back(v.latency_ms);
      return v;
    } catch (const Error& e) {
      ++summary_.failed_windows;
      report(line, e);
      return std::nullopt;
    }
  }

  std::optional<ActionVerdict> feed_line(std::string_view text, std::size_t line) {
    const auto received = Clock::now();
    Record r;
    try {
      r = parse_record(text);
    } catch (const Error& e) {
      ++summary_.records;
      ++summary_.malformed;
      report(line, e);
      return std::nullopt;
    }
    return feed(r, received, line);
  }

  void on_diagnostic(std::function<void(const Diagnostic&)> fn) { diag_ = std::move(fn); }

  StreamSummary summary() const {
    StreamSummary s = summary_;
    s.discarded_frames = assembler_.discarded_frames();
    if (!s.latencies_ms.empty()) {
      std::vector<double> sorted = s.latencies_ms;
      std::sort(sorted.begin(), sorted.end());
      double sum = 0.0;
      for (double l : sorted) sum += l;
      s.mean_latency_ms = sum / static_cast<double>(sorted.size());
      const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
      s.p95_latency_ms = sorted[std::max<std::size_t>(rank, 1) - 1];
      s.max_latency_ms = sorted.back();
    }
    return s;
  }

 private:
  void report(std::size_t line, const Error& e) {
    if (diag_) diag_({line, e.kind(), e.what()});
  }

  const RecognizerModel* model_;
  RecognizeOptions opts_;
  WindowAssembler assembler_;
  StreamSummary summary_;
  std::function<void(const Diagnostic&)> diag_;
};

// Replays a line-oriented stream; blank lines are ignored.
inline StreamSummary run_online(const RecognizerModel& model, std::istream& in,
                                const std::function<void(const ActionVerdict&)>& sink,
                                const std::function<void(const Diagnostic&)>& diagnostics = {},
                                RecognizeOptions opts = {}) {
  OnlineRecognizer rec(model, opts);
  if (diagnostics) rec.on_diagnostic(diagnostics);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (auto v = rec.feed_line(line, line_no)) sink(*v);
  }
  return rec.summary();
}

inline StreamSummary run_online(const RecognizerModel& model, std::span<const Record> records,
                                const std::function<void(const ActionVerdict&)>& sink,
                                const std::function<void(const Diagnostic&)>& diagnostics = {}) {
  OnlineRecognizer rec(model);
  if (diagnostics) rec.on_diagnostic(diagnostics);
  std::size_t n = 0;
  for (const auto& r : records) {
    if (auto v = rec.feed(r, OnlineRecognizer::Clock::now(), ++n)) sink(*v);
  }
  return rec.summary();
}

}  // namespace hsom
