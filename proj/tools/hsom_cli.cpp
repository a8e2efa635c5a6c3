// Command-line front end: generate, train, evaluate, run, inspect.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsom/hsom.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string default_manifest_path(const std::string& stream_path) {
  const std::string ext = ".jsonl";
  if (stream_path.size() > ext.size() && stream_path.compare(stream_path.size() - ext.size(), ext.size(), ext) == 0) {
    return stream_path.substr(0, stream_path.size() - ext.size()) + ".manifest.jsonl";
  }
  return stream_path + ".manifest.jsonl";
}

bool file_exists(const std::string& path) { return static_cast<bool>(std::ifstream(path)); }

hsom::ConfigDocument load_config(const std::string& path) {
  return path.empty() ? hsom::ConfigDocument{} : hsom::ConfigDocument::load(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hsom::Error(hsom::ErrorKind::InvalidConfig, "cannot write '" + path + "'");
  return out;
}

void print_diagnostic(const hsom::Diagnostic& d) {
  std::cerr << "line " << d.line << ": " << d.message << '\n';
}

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string model;
};

struct GenerateOptions {
  std::string out;
  std::string manifest;
  std::optional<std::size_t> samples;
  std::optional<double> speed_min;
  std::optional<double> speed_max;
  std::optional<double> noise;
};

int cmd_generate(const GlobalOptions& g, const GenerateOptions& o) {
  auto cfg = hsom::GeneratorConfig::from_document(load_config(g.config));
  if (g.seed) cfg.seed = *g.seed;
  if (o.samples) cfg.samples_per_action = *o.samples;
  if (o.speed_min) cfg.speed_min = *o.speed_min;
  if (o.speed_max) cfg.speed_max = *o.speed_max;
  if (o.noise) cfg.noise_stddev = *o.noise;
  const auto data = hsom::generate(cfg);
  auto out = open_out(o.out);
  hsom::write_records(out, data.records);
  const std::string manifest_path = o.manifest.empty() ? default_manifest_path(o.out) : o.manifest;
  auto man = open_out(manifest_path);
  hsom::write_manifest(man, data.manifest);
  std::cerr << "wrote " << data.manifest.size() << " windows to " << o.out << " (manifest " << manifest_path
            << ")\n";
  return kExitOk;
}

std::vector<hsom::LabeledWindow> load_labeled(const std::string& data, const std::string& manifest) {
  auto windows = hsom::collect_windows(hsom::load_records(data));
  std::optional<std::vector<hsom::ManifestEntry>> entries;
  const std::string path = manifest.empty() ? default_manifest_path(data) : manifest;
  if (!manifest.empty() || file_exists(path)) entries = hsom::load_manifest(path);
  return hsom::label_windows(std::move(windows), entries);
}

int cmd_train(const GlobalOptions& g, const std::string& data, const std::string& manifest,
              const std::string& report_path) {
  if (g.model.empty()) throw CLI::RequiredError("--model");
  const auto cfg = hsom::PipelineConfig::from_document(load_config(g.config));
  const std::uint64_t seed = g.seed.value_or(cfg.seed.value_or(1));
  const auto windows = load_labeled(data, manifest);
  const auto outcome = hsom::train_pipeline(windows, cfg, seed);
  hsom::save_model(outcome.model, g.model);

  hsom::ReportBuilder builder(outcome.model.labels());
  for (std::size_t i = 0; i < outcome.truth.size(); ++i) builder.add(outcome.truth[i], outcome.predicted[i]);
  std::cout << "Training results (" << windows.size() << " windows, n_max " << outcome.model.encoder.n_max << ")\n"
            << hsom::format_table(builder.report(), false);
  if (!report_path.empty()) {
    auto out = open_out(report_path);
    nlohmann::ordered_json j = hsom::to_json(builder.report());
    j["layer1_quantization_error"] = outcome.layer1_quantization_error;
    j["layer2_quantization_error"] = outcome.layer2_quantization_error;
    out << j.dump(1) << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& data, const std::string& manifest,
                 const std::string& json_path) {
  if (g.model.empty()) throw CLI::RequiredError("--model");
  const auto model = hsom::load_model(g.model);
  const auto entries = hsom::load_manifest(manifest.empty() ? default_manifest_path(data) : manifest);
  std::ifstream in(data);
  if (!in) throw hsom::Error(hsom::ErrorKind::MalformedRecord, "cannot open stream file '" + data + "'");
  const auto ev = hsom::evaluate(model, in, entries, print_diagnostic);
  std::cout << "Generalization results\n" << hsom::format_table(ev.report);
  std::cout << hsom::to_json(ev.report).dump() << '\n';
  if (!json_path.empty()) {
    auto out = open_out(json_path);
    out << hsom::to_json(ev.report).dump(1) << '\n';
  }
  return kExitOk;
}

int cmd_run(const GlobalOptions& g, const std::string& data, bool parallel) {
  if (g.model.empty()) throw CLI::RequiredError("--model");
  const auto model = hsom::load_model(g.model);
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!data.empty() && data != "-") {
    file.open(data);
    if (!file) throw hsom::Error(hsom::ErrorKind::MalformedRecord, "cannot open stream file '" + data + "'");
    in = &file;
  }
  const auto summary = hsom::run_online(
      model, *in, [](const hsom::ActionVerdict& v) { std::cout << hsom::to_json(v).dump() << std::endl; },
      print_diagnostic, hsom::RecognizeOptions{parallel});
  std::cerr << "summary " << hsom::to_json(summary).dump() << '\n';
  return summary.malformed + summary.unbalanced + summary.failed_windows > 0 ? kExitData : kExitOk;
}

int cmd_inspect(const GlobalOptions& g, const std::string& data) {
  if (g.model.empty()) throw CLI::RequiredError("--model");
  const auto model = hsom::load_model(g.model);
  const auto stats = [](const std::vector<double>& w) {
    double lo = w.empty() ? 0.0 : w.front();
    double hi = lo;
    double sum = 0.0;
    for (double v : w) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    return nlohmann::ordered_json{{"count", w.size()},
                                  {"min", lo},
                                  {"max", hi},
                                  {"mean", w.empty() ? 0.0 : sum / static_cast<double>(w.size())}};
  };
  nlohmann::ordered_json head;
  head["kind"] = "model";
  head["labels"] = model.labels();
  head["n_max"] = model.encoder.n_max;
  head["layer1"] = {{"rows", model.layer1.rows()}, {"cols", model.layer1.cols()},
                    {"input_dim", model.layer1.input_dim()}, {"weights", stats(model.layer1.weights())}};
  head["layer2"] = {{"rows", model.layer2.rows()}, {"cols", model.layer2.cols()},
                    {"input_dim", model.layer2.input_dim()}, {"weights", stats(model.layer2.weights())}};
  head["output"] = {{"input_dim", model.output.input_dim()}, {"weights", stats(model.output.weights())}};
  std::cout << head.dump() << '\n';
  if (data.empty()) return kExitOk;

  const auto windows = hsom::collect_windows(hsom::load_records(data));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto a = hsom::analyze_window(model, windows[i].skeletons);
    nlohmann::ordered_json j;
    j["kind"] = "window";
    j["index"] = i;
    j["label"] = windows[i].label ? nlohmann::ordered_json(*windows[i].label) : nlohmann::ordered_json(nullptr);
    j["frames"] = a.frames_used;
    auto winners = nlohmann::ordered_json::array();
    for (const auto& w : a.winners) winners.push_back({w.row, w.col});
    j["winners"] = std::move(winners);
    auto centers = nlohmann::ordered_json::array();
    for (const auto& c : a.trace.centers) centers.push_back({c.row, c.col});
    j["trace"] = std::move(centers);
    j["trace_length"] = hsom::trace_length(a.trace);
    j["ordered_vector"] = a.ordered;
    j["layer2_winner"] = {a.layer2_winner.row, a.layer2_winner.col};
    j["predicted"] = model.labels()[a.distribution.predicted];
    j["activations"] = a.distribution.activations;
    std::cout << j.dump() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stream hierarchical SOM action recognizer"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Sectioned key-value configuration file");
  app.add_option("--seed", g.seed, "Seed for generation or training");
  app.add_option("--model", g.model, "Model file (JSON)");

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic stream file and its manifest");
  generate->add_option("--out", gen.out, "Stream file to write")->required();
  generate->add_option("--manifest", gen.manifest, "Manifest file (default: <out>.manifest.jsonl)");
  generate->add_option("--samples-per-action", gen.samples, "Override samples_per_action");
  generate->add_option("--speed-min", gen.speed_min, "Override speed_min");
  generate->add_option("--speed-max", gen.speed_max, "Override speed_max");
  generate->add_option("--noise", gen.noise, "Override noise_stddev (skeleton units)");

  std::string data;
  std::string manifest;
  std::string json_out;
  auto* train = app.add_subcommand("train", "Train the recognizer on a labelled stream");
  train->add_option("--data", data, "Training stream file")->required();
  train->add_option("--manifest", manifest, "Manifest (labels for unlabelled windows)");
  train->add_option("--report", json_out, "Write the training report as JSON");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a labelled stream");
  evaluate->add_option("--data", data, "Test stream file")->required();
  evaluate->add_option("--manifest", manifest, "Manifest (default: <data>.manifest.jsonl)");
  evaluate->add_option("--json", json_out, "Write the report as JSON");

  bool parallel = false;
  auto* run = app.add_subcommand("run", "Replay a stream (file or stdin) and print one verdict per window");
  run->add_option("--data", data, "Stream file; stdin when omitted or '-'");
  run->add_flag("--parallel", parallel, "Resolve the object stream on a second thread");

  auto* inspect = app.add_subcommand("inspect", "Dump model statistics and per-window traces");
  inspect->add_option("--data", data, "Stream whose windows should be dumped");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(g, gen);
    if (*train) return cmd_train(g, data, manifest, json_out);
    if (*evaluate) return cmd_evaluate(g, data, manifest, json_out);
    if (*run) return cmd_run(g, data, parallel);
    if (*inspect) return cmd_inspect(g, data);
  } catch (const CLI::RequiredError& e) {
    std::cerr << e.what() << " is required\n" << app.help();
    return kExitUsage;
  } catch (const hsom::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  std::cerr << app.help();
  return kExitUsage;
}
