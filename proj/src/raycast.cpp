#include "egonav/raycast.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "egonav/error.hpp"

namespace egonav {

namespace {

constexpr double kEps = 1e-9;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void consider(RayHit& best, double t, SemanticClass cls) {
  if (t > kEps && (!best.hit || t < best.distance)) {
    best.hit = true;
    best.distance = t;
    best.cls = cls;
  }
}

// Vertical rectangle over segment a→b, z in [0, height].
void hit_wall(RayHit& best, const Vec3& o, const Vec3& d, const WallSegment& w) {
  const Vec2 e = w.b - w.a;
  const double denom = d.x() * e.y() - d.y() * e.x();
  if (std::abs(denom) < 1e-15) return;
  const Vec2 ao(w.a.x() - o.x(), w.a.y() - o.y());
  const double t = (ao.x() * e.y() - ao.y() * e.x()) / denom;
  const double s = (ao.x() * d.y() - ao.y() * d.x()) / denom;
  if (s < 0.0 || s > 1.0 || t <= kEps) return;
  const double z = o.z() + t * d.z();
  if (z < 0.0 || z > w.height) return;
  consider(best, t, w.cls);
}

void hit_box(RayHit& best, const Vec3& o, const Vec3& d, const Box& b) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return;
      continue;
    }
    double ta = (b.min[a] - o[a]) / d[a];
    double tb = (b.max[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return;
  }
  consider(best, t0 > kEps ? t0 : t1, b.cls);
}

void hit_cylinder(RayHit& best, const Vec3& o, const Vec3& d, const Vec2& c, double r, double h) {
  const double dx = o.x() - c.x(), dy = o.y() - c.y();
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a < 1e-15) return;
  const double bq = 2.0 * (dx * d.x() + dy * d.y());
  const double cq = dx * dx + dy * dy - r * r;
  const double disc = bq * bq - 4.0 * a * cq;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  for (double t : {(-bq - sq) / (2.0 * a), (-bq + sq) / (2.0 * a)}) {
    if (t <= kEps) continue;
    const double z = o.z() + t * d.z();
    if (z >= 0.0 && z <= h) {
      consider(best, t, SemanticClass::Movable);
      return;
    }
  }
}

std::uint32_t hash3(std::int64_t x, std::int64_t y, std::int64_t z) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::int64_t v : {x, y, z}) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
  }
  return static_cast<std::uint32_t>(h ^ (h >> 32));
}

}  // namespace

void CameraModel::validate() const {
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) throw InvalidRange("hfov must be in (0, 180)");
  if (!(vfov_deg > 0.0 && vfov_deg < 180.0)) throw InvalidRange("vfov must be in (0, 180)");
  if (width <= 0 || height <= 0) throw InvalidRange("image size must be positive");
  if (!(max_range > 0.0)) throw InvalidRange("max_range must be positive");
}

Vec3 CameraModel::ray_direction(int row, int col) const {
  const double fx = (width / 2.0) / std::tan(deg2rad(hfov_deg) / 2.0);
  const double fy = (height / 2.0) / std::tan(deg2rad(vfov_deg) / 2.0);
  const double y = -((col + 0.5) - width / 2.0) / fx;
  const double z = -((row + 0.5) - height / 2.0) / fy;
  return Vec3(1.0, y, z).normalized();
}

std::vector<Vec3> CameraModel::ray_directions() const {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) dirs.push_back(ray_direction(r, c));
  }
  return dirs;
}

RayHit cast_ray(const SceneSpec& scene, const Vec3& o, const Vec3& d, double max_range,
                double time) {
  RayHit best;
  if (d.z() < 0.0 && o.z() > 0.0) {
    const double t = -o.z() / d.z();
    const Vec2 p(o.x() + t * d.x(), o.y() + t * d.y());
    if (scene.ground_extent.contains(p)) {
      SemanticClass cls = SemanticClass::Ground;
      for (const auto& patch : scene.patches) {
        if (p.x() >= patch.min.x() && p.x() <= patch.max.x() && p.y() >= patch.min.y() &&
            p.y() <= patch.max.y()) {
          cls = patch.cls;
        }
      }
      consider(best, t, cls);
    }
  }
  for (const auto& w : scene.walls) hit_wall(best, o, d, w);
  for (const auto& b : scene.boxes) hit_box(best, o, d, b);
  for (const auto& door : scene.doors) {
    if (!door.is_open(time)) hit_wall(best, o, d, door.panel);
  }
  for (const auto& p : scene.pedestrians) hit_cylinder(best, o, d, p.position(time), p.radius, p.height);
  if (best.hit && best.distance > max_range) best = RayHit{};
  if (best.hit) best.point = o + best.distance * d;
  return best;
}

Vec3 surface_color(SemanticClass cls, const Vec3& point) {
  static const std::array<Vec3, kNumClasses> base = {
      Vec3(0.55, 0.50, 0.45),  // ground
      Vec3(0.80, 0.60, 0.20),  // stair
      Vec3(0.60, 0.30, 0.15),  // door
      Vec3(0.85, 0.85, 0.80),  // wall
      Vec3(0.25, 0.45, 0.70),  // obstacle
      Vec3(0.80, 0.20, 0.25),  // movable
      Vec3(0.35, 0.45, 0.25),  // rough ground
      Vec3(0.0, 0.0, 0.0),     // unlabeled
  };
  const auto q = [](double v) { return static_cast<std::int64_t>(std::floor(v / 0.25)); };
  const std::uint32_t h = hash3(q(point.x()), q(point.y()), q(point.z()));
  const double shade = 0.85 + 0.15 * static_cast<double>(h & 0xffff) / 65535.0;
  return base[static_cast<std::size_t>(cls)] * shade;
}

Frame raycast_frame(const SceneSpec& scene, const Pose6D& pose, const CameraModel& cam,
                    double time) {
  cam.validate();
  Frame f;
  f.camera = cam;
  f.pose = pose;
  f.time = time;
  const std::size_t n = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
  f.color.assign(n * 3, 0.0f);
  f.depth.assign(n, kInvalidDepth);
  f.semantic.assign(n, SemanticClass::Unlabeled);
  const auto dirs = cam.ray_directions();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = pose.rotation * dirs[i];
    const RayHit h = cast_ray(scene, pose.position, d, cam.max_range, time);
    if (!h.hit) continue;
    f.depth[i] = static_cast<float>(h.distance);
    f.semantic[i] = h.cls;
    const Vec3 c = surface_color(h.cls, h.point);
    f.color[3 * i + 0] = static_cast<float>(c.x());
    f.color[3 * i + 1] = static_cast<float>(c.y());
    f.color[3 * i + 2] = static_cast<float>(c.z());
  }
  return f;
}

}  // namespace egonav
