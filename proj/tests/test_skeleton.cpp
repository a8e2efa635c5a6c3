#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hsom/skeleton.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace hsom;
using testing_support::random_skeleton;
using testing_support::standing_skeleton;
using testing_support::yaw_move;

TEST(JointIds, AnchorIndices) {
  EXPECT_EQ(index(JointId::RightHip), 5u);
  EXPECT_EQ(index(JointId::LeftHip), 6u);
  EXPECT_EQ(index(JointId::Torso), 7u);
  std::set<std::string_view> names(kJointNames.begin(), kJointNames.end());
  EXPECT_EQ(names.size(), kJointCount);
  for (std::size_t i = 0; i < kJointCount; ++i) {
    EXPECT_EQ(index(*joint_from_name(kJointNames[i])), i);
  }
  EXPECT_FALSE(joint_from_name("Tail").has_value());
}

TEST(BodyParts, PartitionAllJoints) {
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (const auto& part : default_body_parts()) {
    for (JointId j : part.members) seen.insert(index(j));
    total += part.members.size();
  }
  EXPECT_EQ(total, kJointCount);
  EXPECT_EQ(seen.size(), kJointCount);
}

TEST(Rescale, AlreadyStandardIsUnchanged) {
  SkeletonFrame f = standing_skeleton();
  const double d = hip_distance(f);
  for (auto& p : f.joints) p = p / d;
  const auto out = rescale_frame(f);
  for (std::size_t i = 0; i < kJointCount; ++i) {
    EXPECT_DOUBLE_EQ(out.joints[i].x, f.joints[i].x);
    EXPECT_DOUBLE_EQ(out.joints[i].y, f.joints[i].y);
    EXPECT_DOUBLE_EQ(out.joints[i].z, f.joints[i].z);
  }
}

TEST(Rescale, HipDistanceBecomesOne) {
  SkeletonFrame f = standing_skeleton();
  f[JointId::RightHip] = {-200.0, 0.0, 0.0};
  f[JointId::LeftHip] = {200.0, 0.0, 0.0};
  const auto out = rescale_frame(f);
  EXPECT_NEAR(hip_distance(out), 1.0, 1e-12);
  const double factor = 1.0 / oracle::hip_distance(f);
  EXPECT_DOUBLE_EQ(factor, 1.0 / 400.0);
  for (std::size_t i = 0; i < kJointCount; ++i) {
    EXPECT_NEAR(out.joints[i].x, f.joints[i].x * factor, 1e-12);
    EXPECT_NEAR(out.joints[i].y, f.joints[i].y * factor, 1e-12);
  }
}

TEST(Rescale, ScaleInvariance) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const SkeletonFrame f = random_skeleton(rng);
    const double s = std::exp(rng.uniform(-5.0, 5.0));
    SkeletonFrame g = f;
    for (auto& p : g.joints) p = p * s;
    const auto a = rescale_frame(f);
    const auto b = rescale_frame(g);
    for (std::size_t i = 0; i < kJointCount; ++i) {
      EXPECT_NEAR(a.joints[i].x, b.joints[i].x, 1e-12);
      EXPECT_NEAR(a.joints[i].y, b.joints[i].y, 1e-12);
      EXPECT_NEAR(a.joints[i].z, b.joints[i].z, 1e-12);
    }
  }
}

TEST(Rescale, DegenerateHipsThrow) {
  SkeletonFrame f = standing_skeleton();
  f[JointId::LeftHip] = f[JointId::RightHip];
  try {
    (void)rescale_frame(f);
    FAIL() << "expected DegenerateSkeleton";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSkeleton);
  }
}

TEST(Egocentric, IdentityPose) {
  SkeletonFrame f;
  for (std::size_t i = 0; i < kJointCount; ++i) f.joints[i] = {0.1 * i, 0.05 * i, -0.02 * i};
  f[JointId::RightHip] = {-0.5, 0.0, 0.0};
  f[JointId::LeftHip] = {0.5, 0.0, 0.0};
  f[JointId::Torso] = {0.0, 0.4, 0.0};
  f[JointId::Head] = {0.0, 1.0, 0.0};
  const auto basis = egocentric_basis(f);
  EXPECT_EQ(basis.origin, (Vec3{0.0, 0.0, 0.0}));
  const auto out = egocentric_transform(f);
  for (std::size_t i = 0; i < kJointCount; ++i) {
    EXPECT_NEAR(out.joints[i].x, f.joints[i].x, 1e-15);
    EXPECT_NEAR(out.joints[i].y, f.joints[i].y, 1e-15);
    EXPECT_NEAR(out.joints[i].z, f.joints[i].z, 1e-15);
  }
}

TEST(Egocentric, ProjectionOfTorso) {
  SkeletonFrame f = standing_skeleton();
  f[JointId::RightHip] = {0.0, 0.0, 0.0};
  f[JointId::LeftHip] = {1.0, 0.0, 0.0};
  f[JointId::Torso] = {0.3, 0.4, 0.0};
  const auto basis = egocentric_basis(f);
  EXPECT_NEAR(basis.origin.x, 0.3, 1e-15);
  EXPECT_NEAR(basis.origin.y, 0.0, 1e-15);
  const auto ref = oracle::basis(f);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(ref.axes[0][k], basis.lateral[k], 1e-15);
    EXPECT_NEAR(ref.axes[1][k], basis.vertical[k], 1e-15);
    EXPECT_NEAR(ref.axes[2][k], basis.forward[k], 1e-15);
  }
  const auto out = egocentric_transform(f);
  const Vec3 torso = out[JointId::Torso];
  EXPECT_NEAR(torso.x, 0.0, 1e-12);
  EXPECT_NEAR(torso.y, 0.4, 1e-12);
  EXPECT_NEAR(torso.z, 0.0, 1e-12);
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const Vec3 expect = oracle::to_local(ref, f.joints[i]);
    EXPECT_NEAR(out.joints[i].x, expect.x, 1e-12);
    EXPECT_NEAR(out.joints[i].y, expect.y, 1e-12);
    EXPECT_NEAR(out.joints[i].z, expect.z, 1e-12);
  }
}

TEST(Egocentric, BasisIsOrthonormal) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto b = egocentric_basis(random_skeleton(rng));
    EXPECT_NEAR(dot(b.lateral, b.vertical), 0.0, 1e-12);
    EXPECT_NEAR(dot(b.lateral, b.forward), 0.0, 1e-12);
    EXPECT_NEAR(dot(b.vertical, b.forward), 0.0, 1e-12);
    EXPECT_NEAR(norm(b.lateral), 1.0, 1e-12);
    EXPECT_NEAR(norm(b.vertical), 1.0, 1e-12);
    EXPECT_NEAR(norm(b.forward), 1.0, 1e-12);
    // right-handed
    EXPECT_NEAR(dot(cross(b.lateral, b.vertical), b.forward), 1.0, 1e-12);
  }
}

TEST(Egocentric, InvariantToYawAndTranslation) {
  Rng rng(5);
  const SkeletonFrame base = standing_skeleton();
  const auto ref = preprocess(base);
  for (int trial = 0; trial < 200; ++trial) {
    const double angle = rng.uniform(-M_PI, M_PI);
    const Vec3 shift{rng.uniform(-3000, 3000), rng.uniform(-500, 500), rng.uniform(-3000, 3000)};
    SkeletonFrame moved = base;
    for (auto& p : moved.joints) p = yaw_move(p, angle, shift);
    const auto out = preprocess(moved);
    for (std::size_t i = 0; i < kJointCount; ++i) {
      EXPECT_NEAR(out.joints[i].x, ref.joints[i].x, 1e-9);
      EXPECT_NEAR(out.joints[i].y, ref.joints[i].y, 1e-9);
      EXPECT_NEAR(out.joints[i].z, ref.joints[i].z, 1e-9);
    }
  }
}

TEST(Egocentric, QuarterTurnExample) {
  SkeletonFrame f;
  for (std::size_t i = 0; i < kJointCount; ++i) f.joints[i] = {0.03 * i, 0.1 * i, 0.01 * i};
  f[JointId::RightHip] = {-0.5, 0.0, 0.0};
  f[JointId::LeftHip] = {0.5, 0.0, 0.0};
  f[JointId::Torso] = {0.0, 0.4, 0.0};
  f[JointId::Head] = {0.0, 1.0, 0.0};
  SkeletonFrame g = f;
  for (auto& p : g.joints) p = yaw_move(p, M_PI / 2, {3.0, 0.0, 5.0});
  const auto a = egocentric_transform(f);
  const auto b = egocentric_transform(g);
  for (std::size_t i = 0; i < kJointCount; ++i) {
    EXPECT_NEAR(a.joints[i].x, b.joints[i].x, 1e-12);
    EXPECT_NEAR(a.joints[i].y, b.joints[i].y, 1e-12);
    EXPECT_NEAR(a.joints[i].z, b.joints[i].z, 1e-12);
  }
}

TEST(Egocentric, HipsSymmetricAfterPreprocessing) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto out = preprocess(random_skeleton(rng));
    const Vec3 r = out[JointId::RightHip];
    const Vec3 l = out[JointId::LeftHip];
    EXPECT_NEAR(r.y, 0.0, 1e-12);
    EXPECT_NEAR(l.y, 0.0, 1e-12);
    EXPECT_NEAR(l.x - r.x, 1.0, 1e-12);
  }
}

TEST(Egocentric, CollinearTriangleThrows) {
  SkeletonFrame f = standing_skeleton();
  f[JointId::RightHip] = {0, 0, 0};
  f[JointId::LeftHip] = {1, 0, 0};
  f[JointId::Torso] = {0.5, 0, 0};
  try {
    (void)egocentric_transform(f);
    FAIL() << "expected DegenerateTriangle";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateTriangle);
  }
}

namespace {

NormalizationBounds unit_bounds(std::size_t n, double lo, double hi) {
  return {std::vector<double>(n, lo), std::vector<double>(n, hi)};
}

}  // namespace

TEST(Attend, RightArmHasNineValues) {
  const auto f = preprocess(standing_skeleton());
  const auto v = attend(f, default_body_part(BodyPartName::RightArm), unit_bounds(9, -10, 10));
  EXPECT_EQ(v.size(), 9u);
}

TEST(Attend, MinMaxMapping) {
  SkeletonFrame f;
  const BodyPart arm = default_body_part(BodyPartName::RightArm);
  f[JointId::RightShoulder] = {2.0, 2.5, 3.0};     // at min / quarter / max
  f[JointId::RightElbow] = {-5.0, 100.0, 2.0};     // clamped / clamped / mid
  f[JointId::RightHand] = {2.0, 2.0, 2.0};
  NormalizationBounds b = unit_bounds(9, 2.0, 4.0);
  const auto v = attend(f, arm, b);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_DOUBLE_EQ(v[1], 0.25);
  EXPECT_DOUBLE_EQ(v[2], 0.5);
  EXPECT_EQ(v[3], 0.0);
  EXPECT_EQ(v[4], 1.0);
  EXPECT_EQ(v[5], 0.0);
}

TEST(Attend, MonotoneAndIdempotentClamp) {
  Rng rng(23);
  const BodyPart arm = default_body_part(BodyPartName::RightArm);
  const NormalizationBounds b = unit_bounds(9, -0.3, 0.7);
  for (int trial = 0; trial < 200; ++trial) {
    SkeletonFrame f = random_skeleton(rng);
    SkeletonFrame g = f;
    g[JointId::RightHand].x += rng.uniform(0.0, 0.5);
    const auto vf = attend(f, arm, b);
    const auto vg = attend(g, arm, b);
    EXPECT_LE(vf[6], vg[6]);
    for (double x : vf) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    // Feeding a normalized vector back through a unit [0,1] map is the identity.
    SkeletonFrame h;
    for (std::size_t k = 0; k < 3; ++k) h.joints[index(arm.members[k])] = {vf[3 * k], vf[3 * k + 1], vf[3 * k + 2]};
    EXPECT_EQ(attend(h, arm, unit_bounds(9, 0.0, 1.0)), vf);
  }
}

TEST(Attend, BoundsDimensionMismatch) {
  try {
    (void)attend(standing_skeleton(), default_body_part(BodyPartName::RightArm), unit_bounds(6, 0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(FitBounds, SingleFrameIsWidened) {
  const std::vector<SkeletonFrame> frames{preprocess(standing_skeleton())};
  const auto b = fit_bounds(frames, default_body_part(BodyPartName::RightArm));
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_DOUBLE_EQ(b.hi[k] - b.lo[k], 1.0);
}

TEST(FitBounds, TwoFrames) {
  SkeletonFrame a;
  SkeletonFrame b;
  a[JointId::RightHand] = {0.2, 0.0, 0.0};
  b[JointId::RightHand] = {0.8, 0.0, 0.0};
  const std::vector<SkeletonFrame> frames{a, b};
  const auto bounds = fit_bounds(frames, default_body_part(BodyPartName::RightArm));
  EXPECT_EQ(bounds.lo[6], 0.2);
  EXPECT_EQ(bounds.hi[6], 0.8);
}

TEST(FitBounds, MatchesExhaustiveScan) {
  Rng rng(29);
  std::vector<SkeletonFrame> frames;
  for (int i = 0; i < 100; ++i) frames.push_back(random_skeleton(rng));
  const BodyPart arm = default_body_part(BodyPartName::RightArm);
  const auto b = fit_bounds(frames, arm);
  for (std::size_t k = 0; k < 9; ++k) {
    double lo = 1e300;
    double hi = -1e300;
    for (const auto& f : frames) {
      const double v = f.joints[index(arm.members[k / 3])][static_cast<int>(k % 3)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_EQ(b.lo[k], lo);
    EXPECT_EQ(b.hi[k], hi);
  }
}

TEST(FitBounds, EmptyThrows) {
  try {
    (void)fit_bounds({}, default_body_part(BodyPartName::RightArm));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyTrainingSet);
  }
}
