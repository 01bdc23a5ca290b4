#include "egonav/geometry.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "egonav/error.hpp"

namespace egonav {

Pose6D Pose6D::from_yaw(const Vec3& position, double yaw) {
  Pose6D p;
  p.position = position;
  p.rotation = axis_angle(Vec3::UnitZ(), yaw);
  return p;
}

double Pose6D::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).norm();
  return ortho < tol && std::abs(r.determinant() - 1.0) < tol;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 ortho6d_to_rotation(const Vec6& v) {
  const Vec3 a = v.head<3>();
  const Vec3 b = v.tail<3>();
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0) || !std::isfinite(na) || !std::isfinite(nb)) {
    throw DegenerateInput("ortho6d half has zero or non-finite norm");
  }
  // sin of the angle between halves; parallel within tolerance is rejected.
  const double sin_angle = a.cross(b).norm() / (na * nb);
  if (sin_angle < std::sin(kOrthoParallelTol)) {
    throw DegenerateInput("ortho6d halves are parallel");
  }
  const Vec3 b1 = a / na;
  Vec3 b2 = b - b1.dot(b) * b1;
  b2.normalize();
  const Vec3 b3 = b1.cross(b2);
  Mat3 r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b3;
  return r;
}

Vec6 rotation_to_ortho6d(const Mat3& r) {
  if (!is_rotation(r)) throw InvalidRotation("matrix is not a proper rotation");
  Vec6 v;
  v.head<3>() = r.col(0);
  v.tail<3>() = r.col(1);
  return v;
}

std::vector<Vec3> Trajectory::positions() const {
  std::vector<Vec3> out;
  out.reserve(poses.size());
  for (const auto& p : poses) out.push_back(p.position);
  return out;
}

Pose6D compose(const Pose6D& a, const Pose6D& b) {
  Pose6D out;
  out.position = a.position + a.rotation * b.position;
  out.rotation = a.rotation * b.rotation;
  return out;
}

Pose6D relative(const Pose6D& anchor, const Pose6D& p) {
  Pose6D out;
  const Mat3 rt = anchor.rotation.transpose();
  out.position = rt * (p.position - anchor.position);
  out.rotation = rt * p.rotation;
  return out;
}

Trajectory to_egocentric(const Trajectory& traj, const Pose6D& anchor) {
  Trajectory out;
  out.rate_hz = traj.rate_hz;
  out.poses.reserve(traj.size());
  for (const auto& p : traj.poses) out.poses.push_back(relative(anchor, p));
  return out;
}

Trajectory to_world(const Trajectory& traj, const Pose6D& anchor) {
  Trajectory out;
  out.rate_hz = traj.rate_hz;
  out.poses.reserve(traj.size());
  for (const auto& p : traj.poses) out.poses.push_back(compose(anchor, p));
  return out;
}

TrajectoryTensor pack(const Trajectory& traj, std::size_t horizon) {
  if (traj.size() != horizon) {
    throw ShapeMismatch("trajectory has " + std::to_string(traj.size()) + " poses, expected " +
                        std::to_string(horizon));
  }
  TrajectoryTensor t;
  t.rate_hz = traj.rate_hz;
  t.data.resize(static_cast<Eigen::Index>(horizon), 9);
  for (std::size_t i = 0; i < horizon; ++i) {
    const auto& p = traj.poses[i];
    const auto row = static_cast<Eigen::Index>(i);
    t.data.block<1, 3>(row, 0) = p.position.transpose();
    t.data.block<1, 3>(row, 3) = p.rotation.col(0).transpose();
    t.data.block<1, 3>(row, 6) = p.rotation.col(1).transpose();
  }
  return t;
}

Trajectory unpack(const TrajectoryTensor& tensor, std::size_t horizon) {
  if (tensor.rows() != horizon) {
    throw ShapeMismatch("tensor has " + std::to_string(tensor.rows()) + " rows, expected " +
                        std::to_string(horizon));
  }
  Trajectory traj;
  traj.rate_hz = tensor.rate_hz;
  traj.poses.reserve(horizon);
  for (Eigen::Index i = 0; i < tensor.data.rows(); ++i) {
    Pose6D p;
    p.position = tensor.data.block<1, 3>(i, 0).transpose();
    Vec6 v;
    v = tensor.data.block<1, 6>(i, 3).transpose();
    p.rotation = ortho6d_to_rotation(v);
    traj.poses.push_back(p);
  }
  return traj;
}

void write_trajectory(std::ostream& os, const TrajectoryTensor& t) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "rate_hz=" << t.rate_hz << '\n';
  for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
    for (Eigen::Index c = 0; c < 9; ++c) {
      if (c) os << ' ';
      os << t.data(i, c);
    }
    os << '\n';
  }
}

TrajectoryTensor read_trajectory(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("rate_hz=", 0) != 0) {
    throw ParseError("trajectory file must start with rate_hz=<f>");
  }
  TrajectoryTensor t;
  try {
    t.rate_hz = std::stod(header.substr(8));
  } catch (const std::exception&) {
    throw ParseError("bad rate_hz value: " + header);
  }
  if (!(t.rate_hz > 0.0)) throw ParseError("rate_hz must be positive");
  std::vector<std::array<double, 9>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::array<double, 9> row{};
    for (auto& v : row) {
      if (!(ls >> v)) throw ParseError("trajectory row needs 9 values: " + line);
    }
    double extra;
    if (ls >> extra) throw ParseError("trajectory row has more than 9 values: " + line);
    rows.push_back(row);
  }
  t.data.resize(static_cast<Eigen::Index>(rows.size()), 9);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 9; ++c) t.data(static_cast<Eigen::Index>(i), c) = rows[i][c];
  }
  return t;
}

void save_trajectory(const std::string& path, const TrajectoryTensor& t) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  write_trajectory(os, t);
  if (!os) throw IoFailure("write failed: " + path);
}

TrajectoryTensor load_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open " + path);
  return read_trajectory(is);
}

}  // namespace egonav
