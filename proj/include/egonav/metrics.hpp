#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/kdtree.hpp"
#include "egonav/pointcloud.hpp"

namespace egonav {

/// k-NN collision predicate: a position collides when more than `min_hits` of
/// its `k` nearest static points lie within `radius`. Clouds smaller than k use
/// every point and need more than ceil(N/2) hits.
struct CollisionRule {
  std::size_t k = 20;
  std::size_t min_hits = 10;
  double radius = 0.16;
};

class CollisionChecker {
 public:
  /// Keeps only static-class points of `cloud`.
  explicit CollisionChecker(const LabeledPointCloud& cloud, CollisionRule rule = {});

  bool collides(const Vec3& p) const;
  /// Index of the first colliding position, or positions.size() if none.
  std::size_t first_collision(const std::vector<Vec3>& positions) const;
  std::size_t size() const { return tree_.size(); }
  const CollisionRule& rule() const { return rule_; }

 private:
  KdTree tree_;
  CollisionRule rule_;
};

/// Hits required (strictly exceeded) for a cloud of n static points.
std::size_t collision_threshold(std::size_t n, const CollisionRule& rule);

/// (first colliding step) / H, or 1 when the trajectory never collides.
double collision_free_score(const Trajectory& traj, const CollisionChecker& checker);
double collision_free_score(const Trajectory& traj, const LabeledPointCloud& cloud);

inline constexpr double kSmoothnessCap = 1e6;

/// Reciprocal mean absolute speed + acceleration error, capped at kSmoothnessCap.
/// Throws LengthMismatch.
double smoothness(const Trajectory& pred, const Trajectory& gt);

/// Mean Euclidean position error. Throws LengthMismatch.
double ade(const Trajectory& pred, const Trajectory& gt);

/// Minimum ADE over the first K members. Throws BatchTooSmall.
double min_ade_k(const std::vector<Trajectory>& preds, const Trajectory& gt, std::size_t k);

struct EvalReport {
  double collision_free = 0.0;  // mean score ×100
  double smoothness = 0.0;
  double best_of_1 = 0.0;
  double best_of_k = 0.0;
  std::size_t k = 15;
  std::size_t n_samples = 0;
};

/// Running means for EvalReport.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(std::size_t k = 15) : k_(k) {}
  void add(double collision_free, double smooth, double best_of_1, double best_of_k);
  EvalReport report() const;
  std::size_t count() const { return n_; }

 private:
  std::size_t k_;
  std::size_t n_ = 0;
  double cf_ = 0.0, sm_ = 0.0, b1_ = 0.0, bk_ = 0.0;
};

std::string eval_csv_header(std::size_t k);
std::string eval_csv_row(const EvalReport& r);

}  // namespace egonav
