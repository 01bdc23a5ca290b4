#pragma once

#include <cstdint>
#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/scene.hpp"

namespace egonav {

struct WalkerConfig {
  double nominal_speed = 1.3;    // m/s
  double speed_noise = 0.2;      // bound on the smooth speed perturbation (m/s)
  double lateral_noise = 0.08;   // bound on the smooth lateral offset (m)
  double accel = 1.5;            // m/s^2, speeding up
  double brake = 1.5;            // m/s^2, planned braking profile
  double door_standoff = 0.5;    // stop this far before a closed door (m)
  double corner_radius = 0.9;    // corner rounding reach (m)
  double min_clearance = 0.3;    // to static surfaces (m)
  double max_duration = 60.0;    // s
  double rate_hz = kRateHz;
  double start_speed = 0.0;      // m/s at t = 0
};

/// Arc-length parameterised planar polyline.
class PathCurve {
 public:
  PathCurve() = default;
  explicit PathCurve(std::vector<Vec2> points);
  /// Rounds interior corners with quadratic Bézier arcs of reach `radius`.
  static PathCurve rounded(const std::vector<Vec2>& vertices, double radius);

  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  Vec2 at(double s) const;
  Vec2 tangent(double s) const;
  Vec2 normal(double s) const {
    const Vec2 t = tangent(s);
    return {-t.y(), t.x()};
  }
  /// Arc length of the first crossing with segment a→b, or negative if none.
  double first_crossing(const Vec2& a, const Vec2& b) const;
  const std::vector<Vec2>& points() const { return points_; }

 private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

/// Ordered route through the scene graph from the spawn nearest `start`,
/// choosing uniformly at every junction.
std::vector<int> sample_route(const SceneSpec& scene, const Vec2& start, std::uint64_t seed);

/// Scripted pedestrian walk: waypoint following at ~nominal speed with smooth
/// speed noise, heading along velocity, waits at closed doors.
/// Throws NoPath if the start is not in a spawn region, the route is empty, or
/// the path violates the static clearance.
Trajectory generate_demo_trajectory(const SceneSpec& scene, const Pose6D& start,
                                    std::uint64_t seed, const WalkerConfig& cfg = {});

}  // namespace egonav
