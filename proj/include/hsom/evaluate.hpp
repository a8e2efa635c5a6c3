#pragma once

#include <cstddef>
#include <cstdio>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsom/errors.hpp"
#include "hsom/generator.hpp"
#include "hsom/pipeline.hpp"

namespace hsom {

struct EvalReport {
  std::vector<std::string> labels;
  std::vector<std::size_t> tested;      // per label
  std::vector<std::size_t> recognized;  // per label
  std::vector<std::size_t> objects_tested;
  std::vector<std::size_t> objects_found;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : tested) n += c;
    return n;
  }
  std::size_t total_recognized() const {
    std::size_t n = 0;
    for (auto c : recognized) n += c;
    return n;
  }
  double accuracy(std::size_t label) const {
    return tested[label] ? static_cast<double>(recognized[label]) / static_cast<double>(tested[label]) : 0.0;
  }
  double total_accuracy() const {
    return total() ? static_cast<double>(total_recognized()) / static_cast<double>(total()) : 0.0;
  }
  double object_accuracy(std::size_t label) const {
    return objects_tested[label]
               ? static_cast<double>(objects_found[label]) / static_cast<double>(objects_tested[label])
               : 0.0;
  }
  double total_object_accuracy() const {
    std::size_t n = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      n += objects_tested[i];
      k += objects_found[i];
    }
    return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
  }
};

class ReportBuilder {
 public:
  explicit ReportBuilder(std::vector<std::string> labels) {
    const std::size_t c = labels.size();
    report_.labels = std::move(labels);
    report_.tested.assign(c, 0);
    report_.recognized.assign(c, 0);
    report_.objects_tested.assign(c, 0);
    report_.objects_found.assign(c, 0);
    report_.confusion.assign(c, std::vector<std::size_t>(c, 0));
  }

  void add(const std::string& truth, const std::string& predicted, std::optional<int> target = std::nullopt,
           std::optional<int> resolved = std::nullopt) {
    const std::size_t t = index_of(truth);
    const std::size_t p = index_of(predicted);
    ++report_.tested[t];
    ++report_.confusion[t][p];
    if (t == p) ++report_.recognized[t];
    if (target) {
      ++report_.objects_tested[t];
      if (resolved && *resolved == *target) ++report_.objects_found[t];
    }
  }

  const EvalReport& report() const { return report_; }

 private:
  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < report_.labels.size(); ++i) {
      if (report_.labels[i] == label) return i;
    }
    throw Error(ErrorKind::ManifestMismatch, "label '" + label + "' is not known to the model");
  }

  EvalReport report_;
};

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

// Human-readable table: one row per action plus a total row.
inline std::string format_table(const EvalReport& r, bool with_objects = true) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %8s %11s %10s", "Action", "Samples", "Recognized", "Accuracy");
  out << line;
  if (with_objects) out << "  Object detection";
  out << '\n';
  const auto row = [&](const std::string& name, std::size_t n, std::size_t k, double acc, double obj) {
    std::snprintf(line, sizeof line, "%-12s %8zu %11zu %10s", name.c_str(), n, k, percent(acc).c_str());
    out << line;
    if (with_objects) out << "  " << percent(obj);
    out << '\n';
  };
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    row(r.labels[i], r.tested[i], r.recognized[i], r.accuracy(i), r.object_accuracy(i));
  }
  row("Total", r.total(), r.total_recognized(), r.total_accuracy(), r.total_object_accuracy());
  return out.str();
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    per.push_back({{"label", r.labels[i]},
                   {"tested", r.tested[i]},
                   {"recognized", r.recognized[i]},
                   {"accuracy", r.accuracy(i)},
                   {"object_accuracy", r.object_accuracy(i)}});
  }
  j["per_action"] = std::move(per);
  j["total"] = r.total();
  j["total_recognized"] = r.total_recognized();
  j["total_accuracy"] = r.total_accuracy();
  j["object_accuracy"] = r.total_object_accuracy();
  j["labels"] = r.labels;
  j["confusion"] = r.confusion;
  return j;
}

struct Evaluation {
  EvalReport report;
  std::vector<ActionVerdict> verdicts;
  StreamSummary summary;
};

// Replays the stream through the online runtime and scores verdict i
// against manifest entry i.
inline Evaluation evaluate(const RecognizerModel& model, std::istream& stream,
                           const std::vector<ManifestEntry>& manifest,
                           const std::function<void(const Diagnostic&)>& diagnostics = {}) {
  Evaluation ev{EvalReport{}, {}, {}};
  ev.summary = run_online(model, stream, [&](const ActionVerdict& v) { ev.verdicts.push_back(v); }, diagnostics);
  if (ev.verdicts.size() != manifest.size()) {
    throw Error(ErrorKind::ManifestMismatch, "stream produced " + std::to_string(ev.verdicts.size()) +
                                                 " verdicts but the manifest lists " + std::to_string(manifest.size()) +
                                                 " windows");
  }
  ReportBuilder builder(model.labels());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    builder.add(manifest[i].label, ev.verdicts[i].label, manifest[i].target_object_id, ev.verdicts[i].object_id);
  }
  ev.report = builder.report();
  return ev;
}

}  // namespace hsom
