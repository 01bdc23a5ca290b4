#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/pointcloud.hpp"
#include "egonav/semantics.hpp"

namespace egonav {

using Vec2 = Eigen::Vector2d;

/// Vertical rectangle standing on the ground along segment a→b.
struct WallSegment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double height = 2.5;
  SemanticClass cls = SemanticClass::Wall;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  SemanticClass cls = SemanticClass::Obstacle;
};

/// Flat, semantic-only floor region (stairs and rough ground carry no geometry).
struct GroundPatch {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
  SemanticClass cls = SemanticClass::RoughGround;
};

/// A door panel whose state flips at every toggle time.
struct Door {
  WallSegment panel{Vec2::Zero(), Vec2::Zero(), 2.2, SemanticClass::Door};
  bool initially_open = false;
  std::vector<double> toggle_times;  // ascending

  bool is_open(double t) const;
};

/// Vertical cylinder moving piecewise-linearly through timed waypoints.
struct Pedestrian {
  double radius = 0.25;
  double height = 1.75;
  std::vector<double> times;
  std::vector<Vec2> waypoints;

  Vec2 position(double t) const;
};

struct Rect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

struct SpawnRegion {
  int node = 0;
  double radius = 0.3;
};

/// Walkable route network. Junctions are nodes with at least two outgoing edges.
struct RouteGraph {
  std::vector<Vec2> nodes;
  std::vector<std::pair<int, int>> edges;

  std::vector<int> successors(int node) const;
};

struct SceneSpec {
  std::string name;
  Rect ground_extent;
  double camera_height = 1.0;
  std::vector<WallSegment> walls;
  std::vector<Box> boxes;
  std::vector<GroundPatch> patches;
  std::vector<Door> doors;
  std::vector<Pedestrian> pedestrians;
  RouteGraph graph;
  std::vector<int> junctions;
  std::vector<SpawnRegion> spawns;

  /// Throws ParseError describing the first violated invariant.
  void validate() const;
  /// Planar distance from p to the nearest static surface (walls and boxes).
  double static_clearance(const Vec2& p) const;
  /// Start pose centred on spawn `i`, facing along its first outgoing edge.
  Pose6D spawn_pose(std::size_t i) const;
};

std::string scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(std::string_view text);
void save_scene(const std::string& path, const SceneSpec& scene);
SceneSpec load_scene(const std::string& path);

/// Dense static point cloud sampled from the ground-truth geometry (walls and
/// boxes, spacing in metres); used to audit executed paths in simulation.
LabeledPointCloud sample_static_geometry(const SceneSpec& scene, double spacing, double z_min,
                                         double z_max);

// ---- layout generators ------------------------------------------------------
// All layouts place the spawn at the origin facing +x.

enum class SceneKind { Corridor, TJunction, LTurn, Cross, Door, Clutter, PedestrianGap, Crowd };
std::string_view kind_name(SceneKind k);
SceneKind kind_from_name(std::string_view name);

struct CorridorParams {
  double length = 20.0;
  double width = 2.4;
};
SceneSpec make_corridor(const CorridorParams& p);

struct TJunctionParams {
  double stem_length = 10.0;
  double arm_length = 9.0;
  double width = 2.4;
};
SceneSpec make_t_junction(const TJunctionParams& p);

struct LTurnParams {
  double first_length = 10.0;
  double second_length = 10.0;
  double width = 2.4;
  bool left = true;
};
SceneSpec make_l_turn(const LTurnParams& p);

struct CrossParams {
  double stem_length = 10.0;
  double arm_length = 9.0;
  double width = 2.4;
};
SceneSpec make_cross(const CrossParams& p);

struct DoorParams {
  double length = 20.0;
  double width = 2.4;
  double door_distance = 5.0;  // from spawn along +x
  double open_time = 10.0;     // closed on [0, open_time)
};
SceneSpec make_door_corridor(const DoorParams& p);

struct ClutterParams {
  double length = 22.0;
  double width = 3.6;
  std::vector<double> obstacle_x = {8.0, 15.0};
  double obstacle_half = 0.35;
};
SceneSpec make_clutter(const ClutterParams& p);

struct PedestrianGapParams {
  double length = 22.0;
  double width = 4.0;
  double gap_x = 11.0;
  double gap_half_width = 0.95;  // pedestrian centres at ±gap_half_width
  double pedestrian_radius = 0.25;
  double sway = 0.0;  // lateral sway amplitude (m)
};
SceneSpec make_pedestrian_gap(const PedestrianGapParams& p);

struct CrowdParams {
  double length = 22.0;
  double width = 4.4;
  int walkers = 4;
  std::uint64_t seed = 0;
};
SceneSpec make_crowd(const CrowdParams& p);

/// Randomized instance of `kind`; deterministic in `rng`.
SceneSpec random_scene(SceneKind kind, std::mt19937_64& rng);

}  // namespace egonav
