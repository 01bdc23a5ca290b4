#pragma once

#include <cstdint>
#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/scene.hpp"

namespace egonav {

/// Pinhole camera looking along body +x; image rows top to bottom, columns left to right.
struct CameraModel {
  double hfov_deg = 90.0;
  double vfov_deg = 58.0;
  int width = 80;
  int height = 60;
  double max_range = 8.0;

  void validate() const;  // throws InvalidRange
  /// Unit ray direction in the camera body frame for pixel (row, col) centres.
  Vec3 ray_direction(int row, int col) const;
  /// All ray directions, row-major.
  std::vector<Vec3> ray_directions() const;
};

inline constexpr float kInvalidDepth = 0.0f;
inline bool is_valid_depth(float d) { return d > 0.0f; }

/// One rendered RGB-D-semantic image. Depth is Euclidean range along the ray;
/// kInvalidDepth marks misses and cleaned pixels.
struct Frame {
  CameraModel camera;
  Pose6D pose;
  double time = 0.0;
  std::vector<float> color;                 // H*W*3 in [0,1]
  std::vector<float> depth;                 // H*W metres
  std::vector<SemanticClass> semantic;      // H*W

  std::size_t pixels() const { return depth.size(); }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(camera.width) +
           static_cast<std::size_t>(col);
  }
};

struct RayHit {
  double distance = 0.0;
  SemanticClass cls = SemanticClass::Unlabeled;
  Vec3 point = Vec3::Zero();
  bool hit = false;
};

/// Nearest intersection of the ray origin + t·dir (dir unit length, t in
/// (0, max_range]) with the scene at `time`. Closed doors occlude; open doors do not.
RayHit cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir, double max_range,
                double time);

/// Flat per-class colour, modulated by a deterministic texture hash of the hit point.
Vec3 surface_color(SemanticClass cls, const Vec3& point);

Frame raycast_frame(const SceneSpec& scene, const Pose6D& pose, const CameraModel& cam,
                    double time);

}  // namespace egonav
