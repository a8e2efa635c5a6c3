#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "hsom/errors.hpp"
#include "hsom/objects.hpp"
#include "hsom/skeleton.hpp"

namespace hsom {

// One line of a stream file. Three kinds are interleaved:
//   {"t": 0, "kind": "skeleton", "joints": [[x,y,z] x 15]}
//   {"t": 0, "kind": "objects", "objects": [{"id": 1, "pos": [x,y,z]}, ...]}
//   {"t": 0, "kind": "mark", "action": "start"|"end", "label": "Push"}
struct MarkRecord {
  enum class Edge : std::uint8_t { Start, End };

  std::int64_t t_ms{0};
  Edge edge{Edge::Start};
  std::optional<std::string> label;

  bool operator==(const MarkRecord&) const = default;
};

using Record = std::variant<SkeletonFrame, ObjectFrame, MarkRecord>;

inline std::int64_t timestamp(const Record& r) {
  return std::visit([](const auto& v) { return v.t_ms; }, r);
}

namespace detail {

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline Vec3 vec_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::MalformedRecord, "expected a 3-element coordinate");
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (!is_finite(v)) throw Error(ErrorKind::MalformedRecord, "non-finite coordinate");
  return v;
}

inline std::int64_t time_from_json(const nlohmann::json& j) {
  const auto& t = j.at("t");
  if (t.is_number_integer()) return t.get<std::int64_t>();
  if (t.is_number()) return static_cast<std::int64_t>(std::llround(t.get<double>()));
  throw Error(ErrorKind::MalformedRecord, "timestamp must be a number");
}

}  // namespace detail

inline nlohmann::json to_json(const Record& record) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        j["t"] = r.t_ms;
        if constexpr (std::is_same_v<T, SkeletonFrame>) {
          j["kind"] = "skeleton";
          auto joints = nlohmann::json::array();
          for (const auto& p : r.joints) joints.push_back(detail::vec_json(p));
          j["joints"] = std::move(joints);
        } else if constexpr (std::is_same_v<T, ObjectFrame>) {
          j["kind"] = "objects";
          auto objs = nlohmann::json::array();
          for (const auto& o : r.objects) objs.push_back({{"id", o.id}, {"pos", detail::vec_json(o.pos)}});
          j["objects"] = std::move(objs);
        } else {
          j["kind"] = "mark";
          j["action"] = r.edge == MarkRecord::Edge::Start ? "start" : "end";
          if (r.label) j["label"] = *r.label;
        }
      },
      record);
  return j;
}

inline std::string to_line(const Record& record) { return to_json(record).dump(); }

inline Record parse_record(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, e.what());
  }
  try {
    if (!j.is_object()) throw Error(ErrorKind::MalformedRecord, "record is not an object");
    const std::int64_t t = detail::time_from_json(j);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "skeleton") {
      const auto& joints = j.at("joints");
      if (!joints.is_array() || joints.size() != kJointCount) {
        throw Error(ErrorKind::MalformedRecord, "skeleton record needs exactly 15 joints");
      }
      SkeletonFrame f;
      f.t_ms = t;
      for (std::size_t i = 0; i < kJointCount; ++i) f.joints[i] = detail::vec_from_json(joints[i]);
      return f;
    }
    if (kind == "objects") {
      ObjectFrame f;
      f.t_ms = t;
      for (const auto& o : j.at("objects")) {
        const int id = o.at("id").get<int>();
        for (const auto& prev : f.objects) {
          if (prev.id == id) throw Error(ErrorKind::MalformedRecord, "duplicate object id " + std::to_string(id));
        }
        f.objects.push_back({id, detail::vec_from_json(o.at("pos"))});
      }
      return f;
    }
    if (kind == "mark") {
      MarkRecord m;
      m.t_ms = t;
      const std::string action = j.at("action").get<std::string>();
      if (action == "start") {
        m.edge = MarkRecord::Edge::Start;
      } else if (action == "end") {
        m.edge = MarkRecord::Edge::End;
      } else {
        throw Error(ErrorKind::MalformedRecord, "mark action must be 'start' or 'end'");
      }
      if (j.contains("label") && !j["label"].is_null()) m.label = j["label"].get<std::string>();
      return m;
    }
    throw Error(ErrorKind::MalformedRecord, "unknown record kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, e.what());
  }
}

}  // namespace hsom
