#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/metrics.hpp"

namespace egonav {

struct ControllerConfig {
  double lambda = 0.3;            // momentum weight, 1/m
  int k = 3;
  std::size_t intention_step = 40;  // 2 s at 20 Hz
  int kmeans_iters = 50;
  double merge_distance = 0.1;
  std::uint64_t kmeans_seed = 0;
  double blend_window = 0.5;       // s
  double latency_alpha = 0.2;      // EMA weight of the newest measurement
  CollisionRule rule;
};

struct ControllerState {
  std::optional<Vec3> prev_intention;  // world frame
  std::optional<Trajectory> prev_plan; // world frame
  double latency_estimate = 0.0;

  /// Exponential moving average of measured latency.
  void observe_latency(double measured, double alpha);
};

struct ClusterDecision {
  std::vector<std::vector<std::size_t>> clusters;  // candidate indices
  std::vector<Vec3> centers;                       // 2 s points, candidate frame
  std::vector<double> popularity;
  std::vector<double> momentum_penalty;
  std::vector<double> scores;
  int selected_cluster = -1;
  std::size_t selected = 0;  // candidate index of the medoid
};

/// Indices of the candidates whose positions never trigger the collision predicate.
std::vector<std::size_t> filter_collisions(const std::vector<Trajectory>& candidates,
                                           const CollisionChecker& checker);

/// K-means on the survivors' positions at cfg.intention_step. Throws NoSurvivors.
ClusterDecision cluster_candidates(const std::vector<Trajectory>& candidates,
                                   const std::vector<std::size_t>& survivors, const ControllerConfig& cfg);

/// Scores clusters, picks the medoid of the winner and moves the intention.
/// `anchor` maps the candidate frame to the world frame of `state`.
std::size_t score_and_select(ClusterDecision& dec, const std::vector<Trajectory>& candidates,
                             ControllerState& state, double lambda,
                             const Pose6D& anchor = Pose6D::identity(),
                             std::size_t intention_step = 40);

/// Drops the first round(latency·rate) poses; empty when that covers the plan.
Trajectory compensate_latency(const Trajectory& plan, double latency);

/// Cross-fades per-step displacements from `prev` to `next` over `window`
/// seconds starting at the shared handover pose; headings follow the blended
/// velocity.
Trajectory blend(const Trajectory& prev, const Trajectory& next, double window);

}  // namespace egonav
