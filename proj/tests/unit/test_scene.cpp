#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "egonav/corpus.hpp"
#include "egonav/error.hpp"
#include "egonav/raycast.hpp"
#include "egonav/scene.hpp"
#include "egonav/walker.hpp"

using namespace egonav;

namespace {

SceneSpec wall_scene(double x) {
  SceneSpec s;
  s.name = "wall";
  s.ground_extent = {{-50, -50}, {50, 50}};
  s.walls.push_back({{x, -20}, {x, 20}, 3.0, SemanticClass::Wall});
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST(Raycast, LevelCameraOverOpenGroundSplitsAtHorizon) {
  SceneSpec s;
  s.ground_extent = {{-1e4, -1e4}, {1e4, 1e4}};
  CameraModel cam;
  cam.max_range = 1000.0;
  const Frame f = raycast_frame(s, Pose6D::from_yaw(Vec3(0, 0, 1.0), 0.0), cam, 0.0);
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const float d = f.depth[f.index(r, c)];
      if (r < cam.height / 2) {
        EXPECT_FALSE(is_valid_depth(d));
        EXPECT_EQ(f.semantic[f.index(r, c)], SemanticClass::Unlabeled);
      } else {
        EXPECT_TRUE(is_valid_depth(d));
        EXPECT_EQ(f.semantic[f.index(r, c)], SemanticClass::Ground);
      }
    }
  }
}

TEST(Raycast, SquareAndObliqueWallDistances) {
  const SceneSpec s = wall_scene(1.0);
  CameraModel cam;
  cam.width = 81;
  cam.height = 61;
  const Frame f = raycast_frame(s, Pose6D::from_yaw(Vec3(0, 0, 1.0), 0.0), cam, 0.0);
  EXPECT_NEAR(f.depth[f.index(30, 40)], 1.0, 1e-6);
  const double a = 30.0 * std::numbers::pi / 180.0;
  const RayHit h = cast_ray(s, Vec3(0, 0, 1.0), Vec3(std::cos(a), std::sin(a), 0.0), 8.0, 0.0);
  ASSERT_TRUE(h.hit);
  EXPECT_NEAR(h.distance, 1.0 / std::cos(a), 1e-9);
  EXPECT_EQ(h.cls, SemanticClass::Wall);
}

TEST(Raycast, BoxSlabAndRangeLimit) {
  SceneSpec s;
  s.ground_extent = {{-50, -50}, {50, 50}};
  s.boxes.push_back({Vec3(2.0, -0.5, 0.0), Vec3(3.0, 0.5, 1.5), SemanticClass::Obstacle});
  const Vec3 d = Vec3(1.0, 0.2, 0.0).normalized();
  const RayHit h = cast_ray(s, Vec3(0, 0, 1.0), d, 8.0, 0.0);
  ASSERT_TRUE(h.hit);
  EXPECT_NEAR(h.distance, 2.0 / d.x(), 1e-12);
  EXPECT_FALSE(cast_ray(s, Vec3(0, 0, 1.0), d, 1.5, 0.0).hit);
}

TEST(Raycast, ClosedDoorOccludesOpenDoorDoesNot) {
  SceneSpec s = make_door_corridor({20.0, 2.4, 3.0, 5.0});
  const RayHit closed = cast_ray(s, Vec3(0, 0, 1.0), Vec3::UnitX(), 30.0, 1.0);
  ASSERT_TRUE(closed.hit);
  EXPECT_EQ(closed.cls, SemanticClass::Door);
  EXPECT_NEAR(closed.distance, 3.0, 1e-12);
  const RayHit open = cast_ray(s, Vec3(0, 0, 1.0), Vec3::UnitX(), 30.0, 6.0);
  ASSERT_TRUE(open.hit);
  EXPECT_NEAR(open.distance, 20.0, 1e-12);
}

TEST(Raycast, PedestrianCylinderIsMovable) {
  SceneSpec s = wall_scene(10.0);
  Pedestrian p;
  p.radius = 0.3;
  p.times = {0.0};
  p.waypoints = {Vec2(4.0, 0.0)};
  s.pedestrians.push_back(p);
  const RayHit h = cast_ray(s, Vec3(0, 0, 1.0), Vec3::UnitX(), 8.0, 0.0);
  ASSERT_TRUE(h.hit);
  EXPECT_EQ(h.cls, SemanticClass::Movable);
  EXPECT_NEAR(h.distance, 3.7, 1e-12);
}

TEST(Scene, JsonRoundTripAndValidation) {
  std::mt19937_64 rng(11);
  for (auto kind : {SceneKind::Corridor, SceneKind::TJunction, SceneKind::LTurn, SceneKind::Cross,
                    SceneKind::Door, SceneKind::Clutter, SceneKind::PedestrianGap, SceneKind::Crowd}) {
    const SceneSpec s = random_scene(kind, rng);
    EXPECT_NO_THROW(s.validate()) << kind_name(kind);
    const SceneSpec r = scene_from_json(scene_to_json(s));
    EXPECT_EQ(scene_to_json(r), scene_to_json(s));
  }
  EXPECT_THROW(scene_from_json("{not json"), ParseError);
}

TEST(Walker, StraightCorridorMatchesKinematicProfile) {
  const SceneSpec s = make_corridor({10.8, 2.4});
  WalkerConfig cfg;
  cfg.speed_noise = 0.0;
  cfg.lateral_noise = 0.0;
  const Trajectory t = generate_demo_trajectory(s, s.spawn_pose(0), 3, cfg);
  // Oracle: integrate the accel, cruise and braking phases of a 10 m route.
  const double v = cfg.nominal_speed, len = 10.0;
  const double expect = len / v + v / (2 * cfg.accel) + v / (2 * cfg.brake);
  EXPECT_NEAR(t.duration(), expect, 0.25);
  for (std::size_t i = 1; i < t.size(); ++i) {
    EXPECT_GE(t.poses[i].position.x(), t.poses[i - 1].position.x());
  }
  EXPECT_NEAR(t.back().position.x(), len, 0.02);
}

TEST(Walker, NoisyStraightWalkStaysNearNominalSpeed) {
  const SceneSpec s = make_corridor({10.8, 2.4});
  const Trajectory t = generate_demo_trajectory(s, s.spawn_pose(0), 9);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double speed = (t.poses[i].position - t.poses[i - 1].position).norm() * t.rate_hz;
    EXPECT_LE(speed, 1.3 + 0.2 + 0.05);
    EXPECT_GE(t.poses[i].position.x(), t.poses[i - 1].position.x());
  }
  EXPECT_GT(t.duration(), 10.0 / 1.5);
  EXPECT_LT(t.duration(), 10.0 / 1.1 + 1.5);
}

TEST(Walker, JunctionBranchesAreUniform) {
  const SceneSpec s = make_t_junction({});
  int left = 0;
  const int n = 1000;
  for (int seed = 0; seed < n; ++seed) {
    const auto route = sample_route(s, Vec2::Zero(), static_cast<std::uint64_t>(seed));
    ASSERT_EQ(route.size(), 3u);
    left += route.back() == 2 ? 1 : 0;
  }
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_LT(std::abs(left - n / 2.0), 3.0 * sigma);
}

TEST(Walker, WaitsInFrontOfClosedDoor) {
  const SceneSpec s = make_door_corridor({20.0, 2.4, 2.0, 5.0});
  const Trajectory t = generate_demo_trajectory(s, s.spawn_pose(0), 4);
  const double rate = t.rate_hz;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double time = static_cast<double>(i) / rate;
    const double speed = (t.poses[i].position - t.poses[i - 1].position).norm() * rate;
    if (time > 2.5 && time < 5.0) EXPECT_LT(speed, 0.05) << "t=" << time;
    EXPECT_LT(t.poses[i].position.x(), time < 5.0 ? 2.0 : 100.0);
  }
  const auto at = [&](double time) { return t.poses[static_cast<std::size_t>(time * rate)].position.x(); };
  EXPECT_GT(at(8.0) - at(5.0), 1.5);
}

TEST(Walker, ClearanceIsKeptOnEveryGeneratedScene) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 16; ++i) {
    const auto kind = static_cast<SceneKind>(i % 8);
    const SceneSpec s = random_scene(kind, rng);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Trajectory t = generate_demo_trajectory(s, s.spawn_pose(0), seed);
      for (const auto& p : t.poses) EXPECT_GE(s.static_clearance(p.position.head<2>()), 0.3);
    }
  }
}

TEST(Walker, StartOutsideSpawnThrows) {
  const SceneSpec s = make_corridor({});
  EXPECT_THROW(generate_demo_trajectory(s, Pose6D::from_yaw(Vec3(5, 0, 1), 0), 0), NoPath);
}

TEST(Corpus, WindowArithmetic) {
  EXPECT_EQ(window_starts(400, 200, 10).size(), 21u);
  EXPECT_EQ(window_starts(199, 200, 10).size(), 0u);
  EXPECT_EQ(window_starts(200, 200, 10).size(), 1u);
  CorpusConfig cfg;
  const auto k = keyframe_steps(99, cfg);
  ASSERT_EQ(k.size(), 32u);
  EXPECT_EQ(k.back(), 99u);
  EXPECT_EQ(k.front(), 99u - 31u * 3u);
}

TEST(Corpus, SamplesAreContiguousAndFramesEndAtPast) {
  const std::vector<SceneSpec> scenes{make_corridor({20.0, 2.4})};
  const auto corpus = make_corpus(scenes, 5, 7);
  ASSERT_EQ(corpus.size(), 5u);
  EXPECT_TRUE(make_corpus(scenes, 0, 7).empty());
  for (const auto& s : corpus) {
    ASSERT_EQ(s.past.size(), kHorizon);
    ASSERT_EQ(s.future.size(), kHorizon);
    ASSERT_EQ(s.frames.size(), 32u);
    const double gap = (s.future.poses.front().position - s.past.back().position).norm();
    EXPECT_LT(gap, 1.6 / kRateHz);
    EXPECT_EQ((s.frames.back()->pose.position - s.anchor().position).norm(), 0.0);
    for (std::size_t i = 1; i < s.frames.size(); ++i) EXPECT_LT(s.frames[i - 1]->time, s.frames[i]->time);
  }
}

TEST(Corpus, SameSeedWritesIdenticalBytes) {
  namespace fs = std::filesystem;
  const std::vector<SceneSpec> scenes{make_corridor({20.0, 2.4}), make_t_junction({})};
  const fs::path base = fs::temp_directory_path() / "egonav_corpus_test";
  fs::remove_all(base);
  write_corpus((base / "a").string(), scenes, 3, 5);
  write_corpus((base / "b").string(), scenes, 3, 5);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), base / "a");
    EXPECT_EQ(slurp(e.path()), slurp(base / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 2u);
  std::size_t samples = 0;
  read_corpus((base / "a").string(), [&](WalkRecord& w) {
    for (const auto& s : w.samples) {
      EXPECT_EQ(s.frames.size(), 32u);
      ++samples;
    }
  });
  EXPECT_EQ(samples, 6u);
  fs::remove_all(base);
}
