#pragma once

#include <cstddef>
#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsom/errors.hpp"
#include "hsom/generator.hpp"
#include "hsom/pipeline.hpp"
#include "hsom/records.hpp"
#include "hsom/window.hpp"

namespace hsom {

// Strict reader for training/evaluation files: any malformed line is fatal.
inline std::vector<Record> read_records(std::istream& in) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<ActionWindow> collect_windows(std::span<const Record> records) {
  WindowAssembler assembler;
  std::vector<ActionWindow> out;
  for (const auto& r : records) {
    if (auto w = assembler.push(r)) out.push_back(std::move(*w));
  }
  if (assembler.in_window()) throw Error(ErrorKind::UnbalancedMarks, "stream ends inside an open window");
  return out;
}

inline std::vector<ManifestEntry> read_manifest(std::istream& in) {
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(manifest_entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ManifestMismatch, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

// Labels come from the start marks; a manifest, when given, fills in missing
// ones and must agree with the ones present.
inline std::vector<LabeledWindow> label_windows(std::vector<ActionWindow> windows,
                                                const std::optional<std::vector<ManifestEntry>>& manifest) {
  if (manifest && manifest->size() != windows.size()) {
    throw Error(ErrorKind::ManifestMismatch, "manifest lists " + std::to_string(manifest->size()) +
                                                 " windows, stream has " + std::to_string(windows.size()));
  }
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    std::optional<std::string> label = windows[i].label;
    if (manifest) {
      const auto& m = (*manifest)[i];
      if (label && *label != m.label) {
        throw Error(ErrorKind::ManifestMismatch, "window " + std::to_string(i) + " is marked '" + *label +
                                                     "' but the manifest says '" + m.label + "'");
      }
      label = m.label;
    }
    if (!label) throw Error(ErrorKind::MissingLabel, "window " + std::to_string(i) + " has no label");
    out.push_back({std::move(windows[i]), *label});
  }
  return out;
}

inline std::vector<Record> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MalformedRecord, "cannot open stream file '" + path + "'");
  return read_records(in);
}

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ManifestMismatch, "cannot open manifest '" + path + "'");
  return read_manifest(in);
}

}  // namespace hsom
