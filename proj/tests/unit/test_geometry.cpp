#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "egonav/error.hpp"
#include "egonav/geometry.hpp"

using namespace egonav;

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  return axis_angle(Vec3(n(rng), n(rng), n(rng)).normalized(), u(rng));
}

Trajectory random_trajectory(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 2.0);
  Trajectory t;
  for (std::size_t i = 0; i < n; ++i) t.poses.push_back({Vec3(g(rng), g(rng), g(rng)), random_rotation(rng)});
  return t;
}

}  // namespace

TEST(Ortho6d, CanonicalAndScaledDecodeToIdentity) {
  Vec6 v;
  v << 1, 0, 0, 0, 1, 0;
  EXPECT_TRUE(ortho6d_to_rotation(v).isApprox(Mat3::Identity(), 1e-15));
  v << 2, 0, 0, 0, 3, 0;
  EXPECT_TRUE(ortho6d_to_rotation(v).isApprox(Mat3::Identity(), 1e-15));
}

TEST(Ortho6d, FirstTwoColumnsOfRandomRotationDecodeBack) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = random_rotation(rng);
    Vec6 v;
    v << r.col(0), r.col(1);
    EXPECT_LT((ortho6d_to_rotation(v) - r).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Ortho6d, YawNinetyEncoding) {
  const Mat3 r = axis_angle(Vec3::UnitZ(), std::numbers::pi / 2);
  const Vec6 v = rotation_to_ortho6d(r);
  Vec6 expect;
  expect << 0, 1, 0, -1, 0, 0;
  EXPECT_LT((v - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ortho6d, DecodeOfArbitraryInputIsProperRotation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    Vec6 v;
    for (int k = 0; k < 6; ++k) v[k] = n(rng);
    const Mat3 r = ortho6d_to_rotation(v);
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    Vec6 scaled = v;
    scaled.head<3>() *= 3.7;
    scaled.tail<3>() *= 0.02;
    EXPECT_LT((ortho6d_to_rotation(scaled) - r).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Ortho6d, DegenerateInputsThrow) {
  Vec6 zero_half;
  zero_half << 0, 0, 0, 0, 1, 0;
  EXPECT_THROW(ortho6d_to_rotation(zero_half), DegenerateInput);
  Vec6 parallel;
  parallel << 1, 0, 0, 2, 1e-9, 0;
  EXPECT_THROW(ortho6d_to_rotation(parallel), DegenerateInput);
  Vec6 ok;
  ok << 1, 0, 0, 1, 1e-3, 0;
  EXPECT_NO_THROW(ortho6d_to_rotation(ok));
}

TEST(Ortho6d, EncodeRejectsNonRotation) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.1;
  EXPECT_THROW(rotation_to_ortho6d(m), InvalidRotation);
  EXPECT_THROW(rotation_to_ortho6d(-Mat3::Identity()), InvalidRotation);
}

TEST(Frames, EgocentricRoundTripAndAnchorMapsToIdentity) {
  std::mt19937_64 rng(3);
  const Trajectory t = random_trajectory(rng, 50);
  const Pose6D anchor = t.back();
  const Trajectory ego = to_egocentric(t, anchor);
  EXPECT_LT(ego.back().position.norm(), 1e-12);
  EXPECT_TRUE(ego.back().rotation.isApprox(Mat3::Identity(), 1e-12));
  const Trajectory back = to_world(ego, anchor);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_LT((back.poses[i].position - t.poses[i].position).norm(), 1e-9);
    EXPECT_LT((back.poses[i].rotation - t.poses[i].rotation).cwiseAbs().maxCoeff(), 1e-9);
  }
  const Trajectory same = to_egocentric(t, Pose6D::identity());
  EXPECT_EQ((same.poses[7].position - t.poses[7].position).norm(), 0.0);
}

TEST(Pack, StationaryRowsAndStraightWalk) {
  Trajectory still;
  still.poses.assign(kHorizon, Pose6D::identity());
  const auto t = pack(still);
  for (std::size_t r = 0; r < kHorizon; ++r) {
    const double expect[9] = {0, 0, 0, 1, 0, 0, 0, 1, 0};
    for (int c = 0; c < 9; ++c) EXPECT_EQ(t.data(static_cast<long>(r), c), expect[c]);
  }
  Trajectory walk;
  for (std::size_t i = 0; i < kHorizon; ++i) walk.poses.push_back({Vec3(0.05 * i, 0, 0), Mat3::Identity()});
  const auto w = pack(walk);
  for (std::size_t r = 1; r < kHorizon; ++r) {
    EXPECT_NEAR(w.data(static_cast<long>(r), 0) - w.data(static_cast<long>(r) - 1, 0), 0.05, 1e-12);
  }
}

TEST(Pack, RoundTripAndShapeErrors) {
  std::mt19937_64 rng(4);
  const Trajectory t = random_trajectory(rng, kHorizon);
  const Trajectory u = unpack(pack(t));
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_LT((u.poses[i].position - t.poses[i].position).norm(), 1e-5);
    EXPECT_LT((u.poses[i].rotation - t.poses[i].rotation).cwiseAbs().maxCoeff(), 1e-5);
  }
  EXPECT_THROW(pack(random_trajectory(rng, 99)), ShapeMismatch);
  TrajectoryTensor bad;
  bad.data.resize(10, 9);
  bad.data.setZero();
  EXPECT_THROW(unpack(bad), ShapeMismatch);
}

TEST(TrajectoryFile, TextRoundTripIsExact) {
  std::mt19937_64 rng(5);
  const auto t = pack(random_trajectory(rng, kHorizon));
  std::stringstream ss;
  write_trajectory(ss, t);
  const auto r = read_trajectory(ss);
  EXPECT_EQ(r.rate_hz, t.rate_hz);
  EXPECT_EQ((r.data - t.data).cwiseAbs().maxCoeff(), 0.0);
  std::stringstream bad("rate=20\n");
  EXPECT_THROW(read_trajectory(bad), ParseError);
}
