#include "egonav/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "egonav/error.hpp"
#include "egonav/kmeans.hpp"

namespace egonav {

KMeansResult kmeans(const std::vector<Vec3>& points, int k, std::uint64_t seed, int max_iters,
                    double merge_distance) {
  KMeansResult res;
  const std::size_t n = points.size();
  if (n == 0 || k <= 0) return res;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  res.centers.push_back(points[first(rng)]);
  std::vector<double> d2(n);
  const double merge2 = merge_distance * merge_distance;
  while (static_cast<int>(res.centers.size()) < k) {
    double total = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : res.centers) best = std::min(best, (points[i] - c).squaredNorm());
      d2[i] = best;
      total += best;
      worst = std::max(worst, best);
    }
    if (worst <= merge2 || total <= 0.0) break;
    std::uniform_real_distribution<double> u(0.0, total);
    const double target = u(rng);
    double acc = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc >= target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    res.centers.push_back(points[pick]);
  }

  res.labels.assign(n, -1);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < res.centers.size(); ++c) {
        const double d = (points[i] - res.centers[c]).squaredNorm();
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      if (res.labels[i] != best_c) {
        res.labels[i] = best_c;
        changed = true;
      }
    }
    res.iterations = it + 1;
    std::vector<Vec3> sums(res.centers.size(), Vec3::Zero());
    std::vector<std::size_t> counts(res.centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(res.labels[i])] += points[i];
      ++counts[static_cast<std::size_t>(res.labels[i])];
    }
    for (std::size_t c = 0; c < res.centers.size(); ++c) {
      if (counts[c] > 0) res.centers[c] = sums[c] / static_cast<double>(counts[c]);
    }
    if (!changed) break;
  }
  return res;
}

void ControllerState::observe_latency(double measured, double alpha) {
  if (measured < 0.0) throw InvalidRange("latency must be non-negative");
  latency_estimate = latency_estimate <= 0.0 ? measured : (1.0 - alpha) * latency_estimate + alpha * measured;
}

std::vector<std::size_t> filter_collisions(const std::vector<Trajectory>& candidates,
                                           const CollisionChecker& checker) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto pos = candidates[i].positions();
    if (checker.first_collision(pos) == pos.size()) out.push_back(i);
  }
  return out;
}

namespace {

Vec3 intention_point(const Trajectory& t, std::size_t step) {
  return t.poses.at(std::min(step, t.size() - 1)).position;
}

}  // namespace

ClusterDecision cluster_candidates(const std::vector<Trajectory>& candidates,
                                   const std::vector<std::size_t>& survivors, const ControllerConfig& cfg) {
  if (survivors.empty()) throw NoSurvivors("every candidate was filtered");
  std::vector<Vec3> pts;
  pts.reserve(survivors.size());
  for (std::size_t i : survivors) pts.push_back(intention_point(candidates.at(i), cfg.intention_step));
  const auto km = kmeans(pts, cfg.k, cfg.kmeans_seed, cfg.kmeans_iters, cfg.merge_distance);

  ClusterDecision dec;
  std::vector<int> remap(km.centers.size(), -1);
  for (std::size_t j = 0; j < survivors.size(); ++j) {
    const auto c = static_cast<std::size_t>(km.labels[j]);
    if (remap[c] < 0) {
      remap[c] = static_cast<int>(dec.clusters.size());
      dec.clusters.emplace_back();
      dec.centers.push_back(km.centers[c]);
    }
    dec.clusters[static_cast<std::size_t>(remap[c])].push_back(survivors[j]);
  }
  for (const auto& members : dec.clusters) {
    dec.popularity.push_back(static_cast<double>(members.size()) / static_cast<double>(survivors.size()));
  }
  return dec;
}

std::size_t score_and_select(ClusterDecision& dec, const std::vector<Trajectory>& candidates,
                             ControllerState& state, double lambda, const Pose6D& anchor,
                             std::size_t intention_step) {
  if (dec.clusters.empty()) throw NoSurvivors("no clusters to score");
  const std::size_t nc = dec.clusters.size();
  dec.momentum_penalty.assign(nc, 0.0);
  dec.scores.assign(nc, 0.0);
  std::optional<Vec3> prev_local;
  if (state.prev_intention) prev_local = anchor.inverse_transform(*state.prev_intention);
  std::size_t best = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    if (prev_local) dec.momentum_penalty[c] = (dec.centers[c] - *prev_local).norm();
    dec.scores[c] = dec.popularity[c] - lambda * dec.momentum_penalty[c];
    if (c == 0) continue;
    if (dec.scores[c] > dec.scores[best] ||
        (dec.scores[c] == dec.scores[best] && dec.popularity[c] > dec.popularity[best])) {
      best = c;
    }
  }
  const auto& members = dec.clusters[best];
  std::size_t medoid = members.front();
  double medoid_cost = std::numeric_limits<double>::infinity();
  for (std::size_t a : members) {
    const Vec3 pa = intention_point(candidates.at(a), intention_step);
    double cost = 0.0;
    for (std::size_t b : members) cost += (pa - intention_point(candidates.at(b), intention_step)).norm();
    if (cost < medoid_cost) {
      medoid_cost = cost;
      medoid = a;
    }
  }
  dec.selected_cluster = static_cast<int>(best);
  dec.selected = medoid;
  state.prev_intention = anchor.transform(dec.centers[best]);
  return medoid;
}

Trajectory compensate_latency(const Trajectory& plan, double latency) {
  if (latency < 0.0) throw InvalidRange("latency must be non-negative");
  const auto drop = static_cast<std::size_t>(std::llround(latency * plan.rate_hz));
  Trajectory out;
  out.rate_hz = plan.rate_hz;
  if (drop >= plan.size()) return out;
  out.poses.assign(plan.poses.begin() + static_cast<std::ptrdiff_t>(drop), plan.poses.end());
  return out;
}

Trajectory blend(const Trajectory& prev, const Trajectory& next, double window) {
  if (window <= 0.0 || prev.empty() || next.empty()) return next;
  const double steps = window * next.rate_hz;
  Trajectory out;
  out.rate_hz = next.rate_hz;
  out.poses.reserve(next.size());
  Pose6D p0 = next.poses.front();
  p0.position = prev.poses.front().position;
  out.poses.push_back(p0);
  for (std::size_t i = 0; i + 1 < next.size(); ++i) {
    const Vec3 dn = next.poses[i + 1].position - next.poses[i].position;
    Vec3 v = dn;
    const double w = std::min(1.0, (static_cast<double>(i) + 0.5) / steps);
    if (w < 1.0 && i + 1 < prev.size()) {
      const Vec3 dp = prev.poses[i + 1].position - prev.poses[i].position;
      v = (1.0 - w) * dp + w * dn;
    }
    Pose6D pose = next.poses[i + 1];
    pose.position = out.poses.back().position + v;
    if (v.head<2>().norm() > 1e-9 && dn.head<2>().norm() > 1e-9) {
      const double turn = std::atan2(v.y(), v.x()) - std::atan2(dn.y(), dn.x());
      if (turn != 0.0) pose.rotation = axis_angle(Vec3::UnitZ(), turn) * pose.rotation;
    }
    out.poses.push_back(pose);
  }
  return out;
}

}  // namespace egonav
