#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/geometry.hpp"

namespace hsom {

inline constexpr std::size_t kJointCount = 15;

// Indices 5, 6 and 7 anchor the egocentric frame; the rest follow the
// usual depth-sensor middleware ordering.
enum class JointId : std::uint8_t {
  Head = 0,
  Neck = 1,
  LeftShoulder = 2,
  RightShoulder = 3,
  LeftElbow = 4,
  RightHip = 5,
  LeftHip = 6,
  Torso = 7,
  RightElbow = 8,
  LeftHand = 9,
  RightHand = 10,
  LeftKnee = 11,
  RightKnee = 12,
  LeftFoot = 13,
  RightFoot = 14,
};

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "Head",     "Neck",       "LeftShoulder", "RightShoulder", "LeftElbow",
    "RightHip", "LeftHip",    "Torso",        "RightElbow",    "LeftHand",
    "RightHand", "LeftKnee",  "RightKnee",    "LeftFoot",      "RightFoot"};

constexpr std::size_t index(JointId id) { return static_cast<std::size_t>(id); }

constexpr std::string_view joint_name(JointId id) { return kJointNames[index(id)]; }

inline std::optional<JointId> joint_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return static_cast<JointId>(i);
  }
  return std::nullopt;
}

struct SkeletonFrame {
  std::int64_t t_ms{0};
  std::array<Vec3, kJointCount> joints{};

  const Vec3& operator[](JointId id) const { return joints[index(id)]; }
  Vec3& operator[](JointId id) { return joints[index(id)]; }

  bool operator==(const SkeletonFrame&) const = default;
};

inline bool is_finite(const SkeletonFrame& frame) {
  return std::all_of(frame.joints.begin(), frame.joints.end(),
                     [](const Vec3& p) { return is_finite(p); });
}

enum class BodyPartName : std::uint8_t { RightArm, LeftArm, RightLeg, LeftLeg, Body };

inline constexpr std::array<std::string_view, 5> kBodyPartNames = {"RightArm", "LeftArm", "RightLeg",
                                                                   "LeftLeg", "Body"};

constexpr std::string_view body_part_name(BodyPartName name) {
  return kBodyPartNames[static_cast<std::size_t>(name)];
}

inline std::optional<BodyPartName> body_part_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kBodyPartNames.size(); ++i) {
    if (kBodyPartNames[i] == name) return static_cast<BodyPartName>(i);
  }
  return std::nullopt;
}

struct BodyPart {
  BodyPartName name{BodyPartName::RightArm};
  std::vector<JointId> members;  // fixed order; defines the posture vector layout
};

inline BodyPart default_body_part(BodyPartName name) {
  using J = JointId;
  switch (name) {
    case BodyPartName::RightArm: return {name, {J::RightShoulder, J::RightElbow, J::RightHand}};
    case BodyPartName::LeftArm: return {name, {J::LeftShoulder, J::LeftElbow, J::LeftHand}};
    case BodyPartName::RightLeg: return {name, {J::RightKnee, J::RightFoot}};
    case BodyPartName::LeftLeg: return {name, {J::LeftKnee, J::LeftFoot}};
    case BodyPartName::Body: return {name, {J::Head, J::Neck, J::Torso, J::RightHip, J::LeftHip}};
  }
  return {name, {}};
}

inline std::array<BodyPart, 5> default_body_parts() {
  return {default_body_part(BodyPartName::RightArm), default_body_part(BodyPartName::LeftArm),
          default_body_part(BodyPartName::RightLeg), default_body_part(BodyPartName::LeftLeg),
          default_body_part(BodyPartName::Body)};
}

// ---------------------------------------------------------------------------
// Preprocessing: rescale -> egocentric transform -> attend.

inline constexpr double kDegenerateEps = 1e-9;

inline double hip_distance(const SkeletonFrame& frame) {
  return distance(frame[JointId::RightHip], frame[JointId::LeftHip]);
}

// Uniform scaling about the world origin so that the hip-to-hip distance is 1.
inline SkeletonFrame rescale_frame(const SkeletonFrame& frame) {
  const double d = hip_distance(frame);
  if (!(d >= kDegenerateEps)) {
    throw Error(ErrorKind::DegenerateSkeleton, "hip joints coincide (distance " + std::to_string(d) + ")");
  }
  SkeletonFrame out = frame;
  for (auto& p : out.joints) p = p / d;
  return out;
}

// Body-anchored frame built from the right hip, left hip and torso joints.
//   origin   = projection of the torso onto the hip line
//   lateral  = right hip -> left hip
//   vertical = origin -> torso
//   forward  = lateral x vertical
struct EgocentricBasis {
  Vec3 origin;
  Vec3 lateral;
  Vec3 vertical;
  Vec3 forward;

  // R^T (p - origin), with R = [lateral | vertical | forward].
  Vec3 to_local(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {dot(lateral, d), dot(vertical, d), dot(forward, d)};
  }
};

inline EgocentricBasis egocentric_basis(const SkeletonFrame& frame) {
  const Vec3 right_hip = frame[JointId::RightHip];
  const Vec3 left_hip = frame[JointId::LeftHip];
  const Vec3 torso = frame[JointId::Torso];

  const Vec3 hip_axis = left_hip - right_hip;
  const double hip_len = norm(hip_axis);
  if (!(hip_len >= kDegenerateEps)) {
    throw Error(ErrorKind::DegenerateTriangle, "hip joints coincide");
  }
  const Vec3 lateral = hip_axis / hip_len;
  const Vec3 origin = right_hip + lateral * dot(torso - right_hip, lateral);
  const Vec3 up = torso - origin;
  const double height = norm(up);
  if (!(height >= kDegenerateEps)) {
    throw Error(ErrorKind::DegenerateTriangle,
                "torso lies on the hip line (distance " + std::to_string(height) + ")");
  }
  const Vec3 vertical = up / height;
  return {origin, lateral, vertical, cross(lateral, vertical)};
}

inline SkeletonFrame egocentric_transform(const SkeletonFrame& frame) {
  const EgocentricBasis basis = egocentric_basis(frame);
  SkeletonFrame out = frame;
  for (auto& p : out.joints) p = basis.to_local(p);
  return out;
}

// Scale plus rigid transform derived from one skeleton frame; the same
// mapping is applied to the objects observed alongside it.
struct BodyTransform {
  double scale{1.0};
  EgocentricBasis basis;

  Vec3 apply(const Vec3& world) const { return basis.to_local(world * scale); }
};

inline BodyTransform body_transform(const SkeletonFrame& frame) {
  const SkeletonFrame scaled = rescale_frame(frame);
  return {1.0 / hip_distance(frame), egocentric_basis(scaled)};
}

inline SkeletonFrame preprocess(const SkeletonFrame& frame) {
  return egocentric_transform(rescale_frame(frame));
}

using PostureVector = std::vector<double>;

// Per flat dimension min/max used for the [0,1] normalization of attended joints.
struct NormalizationBounds {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const { return lo.size(); }
  bool operator==(const NormalizationBounds&) const = default;
};

inline std::vector<double> raw_attended(const SkeletonFrame& frame, const BodyPart& part) {
  std::vector<double> out;
  out.reserve(3 * part.members.size());
  for (JointId id : part.members) {
    const Vec3& p = frame[id];
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  }
  return out;
}

// Expects a frame that has already been rescaled and made egocentric.
inline PostureVector attend(const SkeletonFrame& frame, const BodyPart& part,
                            const NormalizationBounds& bounds) {
  std::vector<double> v = raw_attended(frame, part);
  if (bounds.lo.size() != v.size() || bounds.hi.size() != v.size()) {
    throw Error(ErrorKind::DimensionMismatch, "bounds have " + std::to_string(bounds.lo.size()) +
                                                  " dimensions, body part needs " + std::to_string(v.size()));
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double u = (v[k] - bounds.lo[k]) / (bounds.hi[k] - bounds.lo[k]);
    v[k] = std::clamp(u, 0.0, 1.0);
  }
  return v;
}

// Frames must already be preprocessed. Flat dimensions narrower than 1e-9
// are widened by 0.5 on each side.
inline NormalizationBounds fit_bounds(std::span<const SkeletonFrame> frames, const BodyPart& part) {
  if (frames.empty()) throw Error(ErrorKind::EmptyTrainingSet, "fit_bounds needs at least one frame");
  NormalizationBounds b;
  b.lo = raw_attended(frames.front(), part);
  b.hi = b.lo;
  for (const auto& f : frames.subspan(1)) {
    const auto v = raw_attended(f, part);
    for (std::size_t k = 0; k < v.size(); ++k) {
      b.lo[k] = std::min(b.lo[k], v[k]);
      b.hi[k] = std::max(b.hi[k], v[k]);
    }
  }
  for (std::size_t k = 0; k < b.lo.size(); ++k) {
    if (b.hi[k] - b.lo[k] < kDegenerateEps) {
      b.lo[k] -= 0.5;
      b.hi[k] += 0.5;
    }
  }
  return b;
}

}  // namespace hsom
