#include "egonav/walker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "egonav/error.hpp"

namespace egonav {

namespace {

// Bounded smooth noise: normalised sum of three sinusoids, |value| <= 1.
class SmoothNoise {
 public:
  SmoothNoise(std::mt19937_64& rng, double min_hz, double max_hz) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double total = 0.0;
    for (auto& c : comps_) {
      c.amp = 0.3 + u(rng);
      c.omega = 2.0 * std::numbers::pi * (min_hz + (max_hz - min_hz) * u(rng));
      c.phase = 2.0 * std::numbers::pi * u(rng);
      total += c.amp;
    }
    for (auto& c : comps_) c.amp /= total;
  }
  double operator()(double t) const {
    double v = 0.0;
    for (const auto& c : comps_) v += c.amp * std::sin(c.omega * t + c.phase);
    return v;
  }

 private:
  struct Comp {
    double amp, omega, phase;
  };
  std::array<Comp, 3> comps_{};
};

}  // namespace

PathCurve::PathCurve(std::vector<Vec2> points) : points_(std::move(points)) {
  cumulative_.reserve(points_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i > 0) acc += (points_[i] - points_[i - 1]).norm();
    cumulative_.push_back(acc);
  }
}

PathCurve PathCurve::rounded(const std::vector<Vec2>& v, double radius) {
  if (v.size() < 3) return PathCurve(v);
  std::vector<Vec2> out;
  out.push_back(v.front());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const Vec2 prev = v[i - 1], cur = v[i], next = v[i + 1];
    const double lin = (cur - prev).norm(), lout = (next - cur).norm();
    const double r = std::min({radius, 0.45 * lin, 0.45 * lout});
    if (r <= 1e-6) {
      out.push_back(cur);
      continue;
    }
    const Vec2 q0 = cur + r * (prev - cur).normalized();
    const Vec2 q2 = cur + r * (next - cur).normalized();
    constexpr int kSegments = 12;
    for (int k = 0; k <= kSegments; ++k) {
      const double u = static_cast<double>(k) / kSegments;
      out.push_back((1 - u) * (1 - u) * q0 + 2 * (1 - u) * u * cur + u * u * q2);
    }
  }
  out.push_back(v.back());
  return PathCurve(std::move(out));
}

Vec2 PathCurve::at(double s) const {
  if (points_.empty()) return Vec2::Zero();
  if (s <= 0.0) return points_.front();
  if (s >= length()) return points_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  const double seg = cumulative_[i] - cumulative_[i - 1];
  const double u = seg > 0.0 ? (s - cumulative_[i - 1]) / seg : 0.0;
  return (1.0 - u) * points_[i - 1] + u * points_[i];
}

Vec2 PathCurve::tangent(double s) const {
  if (points_.size() < 2) return Vec2::UnitX();
  const double len = length();
  const double a = std::clamp(s - 0.05, 0.0, len), b = std::clamp(s + 0.05, 0.0, len);
  Vec2 d = at(b) - at(a);
  if (d.norm() < 1e-9) d = points_.back() - points_[points_.size() - 2];
  return d.normalized();
}

double PathCurve::first_crossing(const Vec2& a, const Vec2& b) const {
  const Vec2 e = b - a;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const Vec2 p = points_[i - 1];
    const Vec2 d = points_[i] - p;
    const double denom = d.x() * e.y() - d.y() * e.x();
    if (std::abs(denom) < 1e-15) continue;
    const Vec2 ap = a - p;
    const double t = (ap.x() * e.y() - ap.y() * e.x()) / denom;
    const double u = (ap.x() * d.y() - ap.y() * d.x()) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return cumulative_[i - 1] + t * d.norm();
  }
  return -1.0;
}

std::vector<int> sample_route(const SceneSpec& scene, const Vec2& start, std::uint64_t seed) {
  int spawn_node = -1;
  for (const auto& sp : scene.spawns) {
    const Vec2 c = scene.graph.nodes.at(static_cast<std::size_t>(sp.node));
    if ((c - start).norm() <= sp.radius + 1e-9) {
      spawn_node = sp.node;
      break;
    }
  }
  if (spawn_node < 0) throw NoPath("start pose is outside every spawn region");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 17u};
  std::mt19937_64 rng(seq);
  std::vector<int> route{spawn_node};
  std::vector<bool> visited(scene.graph.nodes.size(), false);
  visited[static_cast<std::size_t>(spawn_node)] = true;
  for (;;) {
    auto succ = scene.graph.successors(route.back());
    std::erase_if(succ, [&](int n) { return visited[static_cast<std::size_t>(n)]; });
    if (succ.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, succ.size() - 1);
    const int next = succ[pick(rng)];
    visited[static_cast<std::size_t>(next)] = true;
    route.push_back(next);
  }
  if (route.size() < 2) throw NoPath("route from spawn has no edges");
  return route;
}

Trajectory generate_demo_trajectory(const SceneSpec& scene, const Pose6D& start,
                                    std::uint64_t seed, const WalkerConfig& cfg) {
  const Vec2 start_xy = start.position.head<2>();
  const auto route = sample_route(scene, start_xy, seed);

  std::vector<Vec2> vertices{start_xy};
  for (std::size_t i = 1; i < route.size(); ++i) {
    vertices.push_back(scene.graph.nodes[static_cast<std::size_t>(route[i])]);
  }
  const PathCurve curve = PathCurve::rounded(vertices, cfg.corner_radius);
  const double length = curve.length();

  std::vector<double> door_s(scene.doors.size(), -1.0);
  for (std::size_t i = 0; i < scene.doors.size(); ++i) {
    door_s[i] = curve.first_crossing(scene.doors[i].panel.a, scene.doors[i].panel.b);
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 29u};
  std::mt19937_64 rng(seq);
  const SmoothNoise speed_noise(rng, 0.05, 0.3);
  const SmoothNoise lateral_noise(rng, 0.05, 0.25);
  const double lateral0 = lateral_noise(0.0);

  const double dt = 1.0 / cfg.rate_hz;
  const auto max_steps = static_cast<std::size_t>(cfg.max_duration * cfg.rate_hz);
  std::vector<Vec2> xy;
  double s = 0.0, v = cfg.start_speed;
  for (std::size_t k = 0; k < max_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double lat = 0.5 * cfg.lateral_noise * (lateral_noise(t) - lateral0);
    xy.push_back(curve.at(s) + lat * curve.normal(s));
    if (s >= length - 1e-6 && v <= 1e-6) break;

    double stop = length;
    for (std::size_t i = 0; i < scene.doors.size(); ++i) {
      if (door_s[i] < 0.0 || scene.doors[i].is_open(t)) continue;
      const double target = door_s[i] - cfg.door_standoff;
      if (target >= s - 1e-9) stop = std::min(stop, std::max(target, s));
    }
    const double v_nom = cfg.nominal_speed + cfg.speed_noise * speed_noise(t);
    const double v_cap = std::sqrt(2.0 * cfg.brake * std::max(0.0, stop - s));
    const double v_target = std::min(v_nom, v_cap);
    v = std::min(v_target, v + cfg.accel * dt);
    s = std::min(s + v * dt, stop);
    if (stop - s < 1e-4 && v_cap < 0.05) v = 0.0;
  }

  Trajectory traj;
  traj.rate_hz = cfg.rate_hz;
  traj.poses.reserve(xy.size());
  double yaw = start.yaw();
  for (std::size_t k = 0; k < xy.size(); ++k) {
    if (k + 1 < xy.size()) {
      const Vec2 d = xy[k + 1] - xy[k];
      if (d.norm() > 1e-4) yaw = std::atan2(d.y(), d.x());
    }
    const double clearance = scene.static_clearance(xy[k]);
    if (clearance < cfg.min_clearance) {
      throw NoPath("walker path violates static clearance (" + std::to_string(clearance) + " m)");
    }
    traj.poses.push_back(Pose6D::from_yaw(Vec3(xy[k].x(), xy[k].y(), start.position.z()), yaw));
  }
  return traj;
}

}  // namespace egonav
