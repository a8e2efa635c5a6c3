#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/geometry.hpp"
#include "hsom/skeleton.hpp"

namespace hsom {

struct TrackedObject {
  int id{0};
  Vec3 pos;

  bool operator==(const TrackedObject&) const = default;
};

struct ObjectFrame {
  std::int64_t t_ms{0};
  std::vector<TrackedObject> objects;

  bool operator==(const ObjectFrame&) const = default;
};

// Maps every object with the scale and rigid transform of the paired skeleton.
inline ObjectFrame transform_objects(const ObjectFrame& frame, const SkeletonFrame& skeleton) {
  const BodyTransform tf = body_transform(skeleton);
  ObjectFrame out = frame;
  for (auto& o : out.objects) o.pos = tf.apply(o.pos);
  return out;
}

inline double proximity(const Vec3& object_pos, const Vec3& hand_pos) { return distance(object_pos, hand_pos); }

enum class ProximityAggregation : std::uint8_t { Mean, Min };

struct TargetResolution {
  int object_id{0};
  double score{0.0};
  std::map<int, double> per_object_scores;
};

struct SceneFrame {
  SkeletonFrame skeleton;
  ObjectFrame objects;
};

// Aggregates hand/object proximity over the window in egocentric
// coordinates and picks the smallest score (ties to the smallest id).
inline TargetResolution resolve_target(std::span<const SceneFrame> frames, JointId hand = JointId::RightHand,
                                       ProximityAggregation aggregation = ProximityAggregation::Mean) {
  if (frames.empty()) throw Error(ErrorKind::EmptyWindow, "no frames to resolve a target from");

  std::vector<int> ids;
  for (const auto& o : frames.front().objects.objects) ids.push_back(o.id);
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw Error(ErrorKind::InconsistentObjectSet, "window contains no objects");
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorKind::InconsistentObjectSet, "duplicate object id within a frame");
  }

  std::map<int, double> scores;
  for (int id : ids) scores[id] = aggregation == ProximityAggregation::Mean ? 0.0 : std::numeric_limits<double>::infinity();

  for (const auto& f : frames) {
    if (f.objects.objects.size() != ids.size()) {
      throw Error(ErrorKind::InconsistentObjectSet, "object set changes within the window");
    }
    const BodyTransform tf = body_transform(f.skeleton);
    const Vec3 hand_pos = tf.apply(f.skeleton[hand]);
    for (const auto& o : f.objects.objects) {
      auto it = scores.find(o.id);
      if (it == scores.end()) throw Error(ErrorKind::InconsistentObjectSet, "object set changes within the window");
      const double pm = proximity(tf.apply(o.pos), hand_pos);
      it->second = aggregation == ProximityAggregation::Mean ? it->second + pm : std::min(it->second, pm);
    }
  }

  TargetResolution r;
  r.per_object_scores = std::move(scores);
  if (aggregation == ProximityAggregation::Mean) {
    for (auto& [id, s] : r.per_object_scores) s /= static_cast<double>(frames.size());
  }
  r.object_id = r.per_object_scores.begin()->first;
  r.score = r.per_object_scores.begin()->second;
  for (const auto& [id, s] : r.per_object_scores) {
    if (s < r.score) {
      r.object_id = id;
      r.score = s;
    }
  }
  return r;
}

}  // namespace hsom
