#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hsom/config.hpp"
#include "hsom/errors.hpp"
#include "hsom/geometry.hpp"
#include "hsom/records.hpp"
#include "hsom/rng.hpp"
#include "hsom/skeleton.hpp"

namespace hsom {

enum class ActionKind : std::uint8_t { Push, Pull, Put, Lift, Point };

inline constexpr std::array<std::string_view, 5> kActionNames = {"Push", "Pull", "Put", "Lift", "Point"};

constexpr std::string_view action_name(ActionKind a) { return kActionNames[static_cast<std::size_t>(a)]; }

inline std::optional<ActionKind> action_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<ActionKind>(i);
  }
  return std::nullopt;
}

struct GeneratorConfig {
  std::vector<ActionKind> actions{ActionKind::Push, ActionKind::Pull, ActionKind::Put, ActionKind::Lift,
                                  ActionKind::Point};
  std::size_t samples_per_action{12};
  std::size_t n_objects{3};
  double speed_min{0.8};
  double speed_max{1.2};
  double noise_stddev{0.01};  // skeleton units (hip-to-hip distance = 1)
  double frame_rate{30.0};    // Hz
  std::uint64_t seed{1};
  std::size_t idle_frames{5};  // rest frames emitted between windows

  void validate() const {
    const auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidConfig, m); };
    if (actions.empty()) fail("generator needs at least one action");
    if (n_objects < 1) fail("n_objects must be at least 1");
    if (!(speed_min > 0.0) || !(speed_max >= speed_min)) fail("speed range must be positive with min <= max");
    if (!(noise_stddev >= 0.0)) fail("noise_stddev must be non-negative");
    if (!(frame_rate > 0.0)) fail("frame_rate must be positive");
  }

  static GeneratorConfig from_document(const ConfigDocument& doc) {
    GeneratorConfig c;
    const std::string s = "generator";
    if (auto v = doc.get_string_list(s, "actions")) {
      c.actions.clear();
      for (const auto& name : *v) {
        const auto a = action_from_name(name);
        if (!a) throw Error(ErrorKind::InvalidConfig, "unknown action '" + name + "'");
        c.actions.push_back(*a);
      }
    }
    const auto count = [&](const char* key, std::size_t fallback) -> std::size_t {
      const auto v = doc.get_int(s, key);
      if (!v) return fallback;
      if (*v < 0) throw Error(ErrorKind::InvalidConfig, s + "." + key + " must be non-negative");
      return static_cast<std::size_t>(*v);
    };
    c.samples_per_action = count("samples_per_action", c.samples_per_action);
    c.n_objects = count("n_objects", c.n_objects);
    c.idle_frames = count("idle_frames", c.idle_frames);
    if (auto v = doc.get_double(s, "speed_min")) c.speed_min = *v;
    if (auto v = doc.get_double(s, "speed_max")) c.speed_max = *v;
    if (auto v = doc.get_double(s, "noise_stddev")) c.noise_stddev = *v;
    if (auto v = doc.get_double(s, "frame_rate")) c.frame_rate = *v;
    if (auto v = doc.get_int(s, "seed")) c.seed = static_cast<std::uint64_t>(*v);
    c.validate();
    return c;
  }
};

// Each action is a sequence of key postures; a performance holds each key
// posture for a speed-dependent number of frames.
inline constexpr std::size_t kKeyPostures = 24;
inline constexpr double kBaseDurationSec = 2.0;

struct GeneratedSample {
  ActionKind action{ActionKind::Push};
  std::size_t index{0};
  double speed{1.0};
  int target_id{1};
  std::vector<SkeletonFrame> skeletons;  // timestamps relative to the window start
  std::vector<ObjectFrame> objects;
  std::vector<std::size_t> key_of_frame;  // key posture shown by each frame
  std::vector<Vec3> hand_keys_world;      // noise-free hand position per key posture
};

struct ManifestEntry {
  std::size_t index{0};
  std::string label;
  int target_object_id{0};

  bool operator==(const ManifestEntry&) const = default;
};

struct GeneratedDataset {
  std::vector<Record> records;
  std::vector<ManifestEntry> manifest;
};

namespace gen_detail {

// Canonical body in metres: y up, z forward, agent's right side at -x.
inline constexpr double kUpperArm = 0.31;
inline constexpr double kForearm = 0.30;
inline constexpr double kHipWidth = 0.22;
inline constexpr Vec3 kRightShoulder{-0.19, 1.45, 0.0};
inline constexpr Vec3 kRightHandRest{-0.22, 0.88, 0.02};
inline constexpr double kShoulderFollow = 0.2;  // girdle displacement per unit of hand displacement

inline std::array<Vec3, kJointCount> rest_body() {
  std::array<Vec3, kJointCount> j{};
  const auto set = [&j](JointId id, Vec3 p) { j[index(id)] = p; };
  set(JointId::Head, {0.0, 1.70, 0.0});
  set(JointId::Neck, {0.0, 1.50, 0.0});
  set(JointId::LeftShoulder, {0.19, 1.45, 0.0});
  set(JointId::RightShoulder, kRightShoulder);
  set(JointId::LeftElbow, {0.21, 1.16, -0.01});
  set(JointId::LeftHand, {0.22, 0.88, 0.02});
  set(JointId::RightElbow, {-0.21, 1.16, -0.01});
  set(JointId::RightHand, kRightHandRest);
  set(JointId::Torso, {0.0, 1.20, 0.0});
  set(JointId::RightHip, {-0.11, 0.95, 0.0});
  set(JointId::LeftHip, {0.11, 0.95, 0.0});
  set(JointId::RightKnee, {-0.11, 0.50, 0.02});
  set(JointId::LeftKnee, {0.11, 0.50, 0.02});
  set(JointId::RightFoot, {-0.12, 0.06, 0.05});
  set(JointId::LeftFoot, {0.12, 0.06, 0.05});
  return j;
}

// Two-link inverse kinematics; out-of-reach targets are pulled onto the
// reachable sphere. Returns {elbow, hand}.
inline std::pair<Vec3, Vec3> solve_arm(const Vec3& shoulder, Vec3 hand) {
  constexpr double reach = kUpperArm + kForearm - 1e-6;
  constexpr double inner = kUpperArm - kForearm + 1e-6;
  Vec3 d = hand - shoulder;
  double len = norm(d);
  if (len > reach) {
    hand = shoulder + d * (reach / len);
    d = hand - shoulder;
    len = reach;
  } else if (len < inner) {
    hand = shoulder + d * (inner / len);
    d = hand - shoulder;
    len = inner;
  }
  const Vec3 u = d / len;
  const double a = (kUpperArm * kUpperArm - kForearm * kForearm + len * len) / (2.0 * len);
  const double h = std::sqrt(std::max(0.0, kUpperArm * kUpperArm - a * a));
  const Vec3 hint{-0.4, -1.0, -0.3};
  const Vec3 perp = normalized(hint - u * dot(hint, u));
  return {shoulder + u * a + perp * h, hand};
}

inline Vec3 lerp(const Vec3& a, const Vec3& b, double s) { return a + (b - a) * s; }

inline double ease(double s) { return 0.5 * (1.0 - std::cos(std::numbers::pi * s)); }

struct Placement {
  double scale{1.0};  // body size multiplier
  double yaw{0.0};
  Vec3 offset;        // metres, camera frame

  // Body frame (metres) -> camera frame (millimetres). The agent faces the camera.
  Vec3 to_world(const Vec3& body) const {
    const double a = std::numbers::pi + yaw;
    const Vec3 p = body * scale;
    const Vec3 r{std::cos(a) * p.x + std::sin(a) * p.z, p.y, -std::sin(a) * p.x + std::cos(a) * p.z};
    return (r + offset) * 1000.0;
  }
  double unit_mm() const { return kHipWidth * scale * 1000.0; }  // one skeleton unit
};

inline Vec3 jitter(Rng& rng, double amount) {
  return {rng.uniform(-amount, amount), rng.uniform(-amount, amount), rng.uniform(-amount, amount)};
}

}  // namespace gen_detail

// Deterministic in (config.seed, action, index). Draw order is fixed so that
// changing only the speed range changes only the frame timing.
inline GeneratedSample generate_sample(const GeneratorConfig& config, ActionKind action, std::size_t sample_index) {
  using namespace gen_detail;
  config.validate();
  Rng rng(derive_seed(derive_seed(config.seed, static_cast<std::uint64_t>(action) + 1), sample_index));

  GeneratedSample s;
  s.action = action;
  s.index = sample_index;
  s.speed = rng.uniform(config.speed_min, config.speed_max);

  Placement place;
  place.scale = rng.uniform(0.9, 1.1);
  place.yaw = rng.uniform(-0.7, 0.7);
  place.offset = {rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2), rng.uniform(2.0, 3.0)};

  // Hand path in the body frame, sampled at the key postures.
  const Vec3 ja = jitter(rng, 0.03);
  const Vec3 jb = jitter(rng, 0.03);
  std::vector<Vec3> hand_keys(kKeyPostures);
  std::optional<Vec3> point_target;
  const auto linear = [&](Vec3 a, Vec3 b) {
    for (std::size_t k = 0; k < kKeyPostures; ++k) {
      hand_keys[k] = lerp(a, b, ease(static_cast<double>(k) / static_cast<double>(kKeyPostures - 1)));
    }
  };
  const Vec3 push_near{-0.19, 1.15, 0.22};
  const Vec3 push_far{-0.19, 1.17, 0.47};
  const Vec3 put_high{-0.21, 1.30, 0.33};
  const Vec3 put_low{-0.21, 1.03, 0.33};
  switch (action) {
    case ActionKind::Push: linear(push_near + ja, push_far + jb); break;
    case ActionKind::Pull: linear(push_far + ja, push_near + jb); break;
    case ActionKind::Put: linear(put_high + ja, put_low + jb); break;
    case ActionKind::Lift: linear(put_low + ja, put_high + jb); break;
    case ActionKind::Point: {
      const Vec3 rest = Vec3{-0.24, 0.95, 0.12} + ja;
      const Vec3 dir = normalized(Vec3{-0.15 + jb.x, 0.05 + jb.y, 1.0});
      const Vec3 extended = kRightShoulder + dir * (kUpperArm + kForearm - 0.02);
      constexpr double reach_phase = 0.6;
      for (std::size_t k = 0; k < kKeyPostures; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(kKeyPostures - 1);
        hand_keys[k] = u < reach_phase ? lerp(rest, extended, ease(u / reach_phase)) : extended;
      }
      point_target = extended + dir * rng.uniform(0.25, 0.45);
      break;
    }
  }

  // Key postures: the right shoulder follows the hand a little, the arm is
  // solved from there, and the rest of the body stays static.
  const auto body = rest_body();
  std::vector<std::array<Vec3, kJointCount>> keys(kKeyPostures, body);
  for (std::size_t k = 0; k < kKeyPostures; ++k) {
    const Vec3 shoulder = kRightShoulder + (hand_keys[k] - kRightHandRest) * kShoulderFollow;
    const auto [elbow, hand] = solve_arm(shoulder, hand_keys[k]);
    hand_keys[k] = hand;
    keys[k][index(JointId::RightShoulder)] = shoulder;
    keys[k][index(JointId::RightElbow)] = elbow;
    keys[k][index(JointId::RightHand)] = hand;
  }
  for (const auto& h : hand_keys) s.hand_keys_world.push_back(place.to_world(h));

  // Objects: ids 1..n, one of them the target.
  const auto n_obj = static_cast<int>(config.n_objects);
  s.target_id = 1 + static_cast<int>(rng.below(config.n_objects));
  const double unit = kHipWidth * place.scale;  // metres per skeleton unit, before world scaling
  const auto min_path_distance = [&](const Vec3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : hand_keys) best = std::min(best, distance(p, h * place.scale) / unit);
    return best;
  };
  const auto max_path_distance = [&](const Vec3& p) {
    double worst = 0.0;
    for (const auto& h : hand_keys) worst = std::max(worst, distance(p, h * place.scale) / unit);
    return worst;
  };
  // Distractors stay >= 0.5 units from the whole hand path; for pointing they
  // must also stay farther than the target ever gets from the hand.
  double required = 0.5;
  if (point_target) required = std::max(required, max_path_distance(*point_target * place.scale) + 0.5);
  std::vector<Vec3> distractors;
  for (int id = 1; id <= n_obj; ++id) {
    if (id == s.target_id) continue;
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const Vec3 p{rng.uniform(-1.6, 1.6), rng.uniform(0.3, 2.0), rng.uniform(-0.6, 2.2)};
      if (min_path_distance(p * place.scale) < required) continue;
      bool clear = true;
      for (const auto& q : distractors) clear = clear && distance(p, q) >= 0.25;
      if (point_target) clear = clear && distance(p, *point_target) >= 0.25;
      if (!clear) continue;
      distractors.push_back(p);
      placed = true;
    }
    if (!placed) throw Error(ErrorKind::InvalidConfig, "could not place distractor objects; reduce n_objects");
  }

  // Timing: F frames, frame f shows key floor(f*K/F).
  const double base_frames = std::round(kBaseDurationSec * config.frame_rate);
  const auto n_frames = static_cast<std::size_t>(std::max(1.0, std::round(base_frames / s.speed)));
  const double noise_mm = config.noise_stddev * place.unit_mm();
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t k = f * kKeyPostures / n_frames;
    s.key_of_frame.push_back(k);
    SkeletonFrame sf;
    sf.t_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(f) * 1000.0 / config.frame_rate));
    for (std::size_t j = 0; j < kJointCount; ++j) {
      Vec3 p = place.to_world(keys[k][j]);
      if (noise_mm > 0.0) p = p + Vec3{rng.normal(), rng.normal(), rng.normal()} * noise_mm;
      sf.joints[j] = p;
    }
    ObjectFrame of;
    of.t_ms = sf.t_ms;
    std::size_t next_distractor = 0;
    for (int id = 1; id <= n_obj; ++id) {
      Vec3 pos;
      if (id == s.target_id) {
        pos = point_target ? place.to_world(*point_target) : sf[JointId::RightHand];
      } else {
        pos = place.to_world(distractors[next_distractor++]);
      }
      of.objects.push_back({id, pos});
    }
    s.skeletons.push_back(sf);
    s.objects.push_back(std::move(of));
  }
  return s;
}

// Windows are interleaved round-robin over actions: sample 0 of every
// action, then sample 1, and so on. Idle rest frames separate windows.
inline GeneratedDataset generate(const GeneratorConfig& config) {
  config.validate();
  GeneratedDataset out;
  std::int64_t clock = 0;
  const auto frame_ms = static_cast<std::int64_t>(std::llround(1000.0 / config.frame_rate));
  std::size_t window_index = 0;
  for (std::size_t i = 0; i < config.samples_per_action; ++i) {
    for (ActionKind action : config.actions) {
      const GeneratedSample s = generate_sample(config, action, i);
      const std::string label(action_name(action));
      out.records.push_back(MarkRecord{clock, MarkRecord::Edge::Start, label});
      for (std::size_t f = 0; f < s.skeletons.size(); ++f) {
        SkeletonFrame sf = s.skeletons[f];
        ObjectFrame of = s.objects[f];
        sf.t_ms += clock;
        of.t_ms += clock;
        out.records.push_back(sf);
        out.records.push_back(std::move(of));
      }
      const SkeletonFrame last = s.skeletons.back();
      const ObjectFrame last_objects = s.objects.back();
      const std::int64_t t_end = clock + last.t_ms;
      out.records.push_back(MarkRecord{t_end, MarkRecord::Edge::End, std::nullopt});
      out.manifest.push_back({window_index++, label, s.target_id});
      clock = t_end;
      // Idle frames hold the final pose; they fall outside any window.
      for (std::size_t k = 0; k < config.idle_frames; ++k) {
        clock += frame_ms;
        SkeletonFrame sf = last;
        ObjectFrame of = last_objects;
        sf.t_ms = clock;
        of.t_ms = clock;
        out.records.push_back(sf);
        out.records.push_back(std::move(of));
      }
      clock += frame_ms;
    }
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["index"] = e.index;
  j["label"] = e.label;
  j["target_object_id"] = e.target_object_id;
  return j;
}

inline ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
  return {j.at("index").get<std::size_t>(), j.at("label").get<std::string>(), j.at("target_object_id").get<int>()};
}

inline void write_records(std::ostream& out, std::span<const Record> records) {
  for (const auto& r : records) out << to_line(r) << '\n';
}

inline void write_manifest(std::ostream& out, std::span<const ManifestEntry> manifest) {
  for (const auto& e : manifest) out << to_json(e).dump() << '\n';
}

}  // namespace hsom
