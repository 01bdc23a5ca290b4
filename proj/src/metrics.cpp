#include "egonav/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "egonav/error.hpp"

namespace egonav {

namespace {

std::vector<Vec3> static_points(const LabeledPointCloud& cloud) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (is_static_class(cloud.classes[i])) pts.push_back(cloud.points[i]);
  }
  return pts;
}

void require_same_length(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    throw LengthMismatch(std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " poses");
  }
}

std::vector<double> speeds(const Trajectory& t) {
  std::vector<double> v;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    v.push_back((t.poses[i + 1].position - t.poses[i].position).norm() * t.rate_hz);
  }
  return v;
}

}  // namespace

CollisionChecker::CollisionChecker(const LabeledPointCloud& cloud, CollisionRule rule)
    : tree_(static_points(cloud)), rule_(rule) {}

std::size_t collision_threshold(std::size_t n, const CollisionRule& rule) {
  if (n >= rule.k) return rule.min_hits;
  return (n + 1) / 2;
}

bool CollisionChecker::collides(const Vec3& p) const {
  const std::size_t n = tree_.size();
  if (n == 0) return false;
  const double r2 = rule_.radius * rule_.radius;
  std::size_t hits = 0;
  for (const auto& nb : tree_.knn(p, rule_.k)) hits += nb.dist2 <= r2 ? 1 : 0;
  return hits > collision_threshold(n, rule_);
}

std::size_t CollisionChecker::first_collision(const std::vector<Vec3>& positions) const {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (collides(positions[i])) return i;
  }
  return positions.size();
}

double collision_free_score(const Trajectory& traj, const CollisionChecker& checker) {
  if (traj.empty()) return 1.0;
  const std::size_t first = checker.first_collision(traj.positions());
  return static_cast<double>(first) / static_cast<double>(traj.size());
}

double collision_free_score(const Trajectory& traj, const LabeledPointCloud& cloud) {
  return collision_free_score(traj, CollisionChecker(cloud));
}

double smoothness(const Trajectory& pred, const Trajectory& gt) {
  require_same_length(pred, gt);
  if (pred.rate_hz != gt.rate_hz) throw LengthMismatch("trajectory rates differ");
  const auto vp = speeds(pred), vg = speeds(gt);
  if (vp.size() < 2) throw LengthMismatch("smoothness needs at least 3 poses");
  const std::size_t n = vp.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ap = (vp[i + 1] - vp[i]) * pred.rate_hz;
    const double ag = (vg[i + 1] - vg[i]) * gt.rate_hz;
    sum += std::abs(vp[i] - vg[i]) + std::abs(ap - ag);
  }
  const double mean = sum / static_cast<double>(n);
  if (mean < 1.0 / kSmoothnessCap) return kSmoothnessCap;
  return 1.0 / mean;
}

double ade(const Trajectory& pred, const Trajectory& gt) {
  require_same_length(pred, gt);
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += (pred.poses[i].position - gt.poses[i].position).norm();
  }
  return sum / static_cast<double>(pred.size());
}

double min_ade_k(const std::vector<Trajectory>& preds, const Trajectory& gt, std::size_t k) {
  if (k == 0 || preds.size() < k) {
    throw BatchTooSmall("need " + std::to_string(k) + " predictions, have " + std::to_string(preds.size()));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) best = std::min(best, ade(preds[i], gt));
  return best;
}

void EvalAccumulator::add(double collision_free, double smooth, double best_of_1, double best_of_k) {
  ++n_;
  cf_ += collision_free;
  sm_ += smooth;
  b1_ += best_of_1;
  bk_ += best_of_k;
}

EvalReport EvalAccumulator::report() const {
  EvalReport r;
  r.k = k_;
  r.n_samples = n_;
  if (n_ == 0) return r;
  const double n = static_cast<double>(n_);
  r.collision_free = 100.0 * cf_ / n;
  r.smoothness = sm_ / n;
  r.best_of_1 = b1_ / n;
  r.best_of_k = bk_ / n;
  return r;
}

std::string eval_csv_header(std::size_t k) {
  return "collision,smoothness,best_of_1,best_of_" + std::to_string(k) + ",n";
}

std::string eval_csv_row(const EvalReport& r) {
  std::ostringstream os;
  os << std::setprecision(6) << r.collision_free << ',' << r.smoothness << ',' << r.best_of_1 << ','
     << r.best_of_k << ',' << r.n_samples;
  return os.str();
}

}  // namespace egonav
