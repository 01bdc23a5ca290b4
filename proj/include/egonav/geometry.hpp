#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace egonav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline constexpr std::size_t kHorizon = 100;      // prediction steps
inline constexpr double kRateHz = 20.0;            // trajectory sample rate
inline constexpr std::size_t kTrajChannels = 9;    // x y z + ortho6d
inline constexpr double kOrthoParallelTol = 1e-6;  // rad between ortho6d halves

/// Rigid pose: world-from-body transform. Body axes are x forward, y left, z up.
struct Pose6D {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();

  static Pose6D identity() { return {}; }
  static Pose6D from_yaw(const Vec3& position, double yaw);

  Vec3 transform(const Vec3& body_point) const { return position + rotation * body_point; }
  Vec3 inverse_transform(const Vec3& world_point) const {
    return rotation.transpose() * (world_point - position);
  }
  double yaw() const;
};

/// ‖RᵀR − I‖_F < tol and |det R − 1| < tol.
bool is_rotation(const Mat3& r, double tol = 1e-6);

/// Gram–Schmidt decode of the continuous 6D rotation representation.
/// Throws DegenerateInput when a half is zero or the halves are parallel.
Mat3 ortho6d_to_rotation(const Vec6& v);

/// First two columns of r. Throws InvalidRotation if r is not a proper rotation.
Vec6 rotation_to_ortho6d(const Mat3& r);

/// Rotation by `angle` about the unit `axis`.
Mat3 axis_angle(const Vec3& axis, double angle);

struct Trajectory {
  std::vector<Pose6D> poses;
  double rate_hz = kRateHz;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  double duration() const { return static_cast<double>(poses.size()) / rate_hz; }
  const Pose6D& back() const { return poses.back(); }

  std::vector<Vec3> positions() const;
};

/// H×9 row-major channel layout: x, y, z, ortho6d[0..6].
struct TrajectoryTensor {
  Eigen::Matrix<double, Eigen::Dynamic, 9, Eigen::RowMajor> data;
  double rate_hz = kRateHz;

  std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
};

/// Express every pose in the frame of `anchor`.
Trajectory to_egocentric(const Trajectory& traj, const Pose6D& anchor);
/// Inverse of to_egocentric.
Trajectory to_world(const Trajectory& traj, const Pose6D& anchor);
Pose6D compose(const Pose6D& a, const Pose6D& b);
Pose6D relative(const Pose6D& anchor, const Pose6D& p);

/// Throws ShapeMismatch unless traj has exactly `horizon` poses.
TrajectoryTensor pack(const Trajectory& traj, std::size_t horizon = kHorizon);
/// Re-orthonormalizes each rotation. Throws ShapeMismatch on wrong row count.
Trajectory unpack(const TrajectoryTensor& tensor, std::size_t horizon = kHorizon);

// Trajectory text file: header `rate_hz=<f>` then one row of 9 decimals per pose.
void write_trajectory(std::ostream& os, const TrajectoryTensor& t);
TrajectoryTensor read_trajectory(std::istream& is);
void save_trajectory(const std::string& path, const TrajectoryTensor& t);
TrajectoryTensor load_trajectory(const std::string& path);

}  // namespace egonav
