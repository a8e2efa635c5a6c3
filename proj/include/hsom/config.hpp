#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hsom/errors.hpp"

namespace hsom {

// Flat sectioned key-value configuration (a TOML subset):
//
//   # comment
//   [layer1]
//   rows = 30
//   form = "unsquared"
//   [generator]
//   actions = ["Push", "Pull"]
//
// Values are kept as text and converted on access.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text) {
    ConfigDocument doc;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t eol = std::min(text.find('\n', pos), text.size());
      std::string line(text.substr(pos, eol - pos));
      pos = eol + 1;
      ++line_no;
      line = trim(strip_comment(line));
      if (line.empty()) {
        if (eol == text.size()) break;
        continue;
      }
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(line_no, "empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(line_no, "missing key");
      if (value.empty()) fail(line_no, "missing value for '" + key + "'");
      doc.values_[section][key] = value;
      if (eol == text.size()) break;
    }
    return doc;
  }

  static ConfigDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& section, const std::string& key) const { return raw(section, key).has_value(); }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  }

  std::optional<double> get_double(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidConfig, section + "." + key + ": expected a number, got '" + *v + "'");
    }
  }

  std::optional<std::int64_t> get_int(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw Error(ErrorKind::InvalidConfig, section + "." + key + ": expected an integer, got '" + *v + "'");
    }
    return out;
  }

  std::optional<bool> get_bool(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw Error(ErrorKind::InvalidConfig, section + "." + key + ": expected true/false, got '" + *v + "'");
  }

  std::optional<std::string> get_string(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    return unquote(*v);
  }

  std::optional<std::vector<std::string>> get_string_list(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    if (v->size() < 2 || v->front() != '[' || v->back() != ']') {
      throw Error(ErrorKind::InvalidConfig, section + "." + key + ": expected a [list]");
    }
    std::vector<std::string> items;
    std::string body = v->substr(1, v->size() - 2);
    std::size_t start = 0;
    while (start <= body.size()) {
      const std::size_t comma = std::min(body.find(',', start), body.size());
      const std::string item = trim(body.substr(start, comma - start));
      if (!item.empty()) items.push_back(unquote(item));
      start = comma + 1;
    }
    return items;
  }

 private:
  [[noreturn]] static void fail(std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line) + ": " + msg);
  }

  static std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace hsom
