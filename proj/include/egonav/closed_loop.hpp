#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "egonav/pipeline.hpp"

namespace egonav {

struct ClosedLoopConfig {
  double duration = 30.0;      // s of simulated time, warm-up included
  double warmup = 5.0;         // s of scripted walking before the controller takes over
  double cycle_period = 0.5;   // s between predictions
  double latency = 0.3;        // s, simulated compute + transport delay
  double latency_jitter = 0.1; // uniform ± around `latency`
  double speed_cap = 1.5;      // m/s
  double lookahead = 0.5;      // s, pure-pursuit target ahead on the plan
  double heading_min_speed = 0.2;  // m/s of plan motion below which the heading is held
  int max_empty_cycles = 5;
  bool raise_on_stuck = false;  // throw AgentStuck instead of returning the log
  std::size_t spawn = 0;
  SampleOptions sample;
  ControllerConfig controller;
  CorpusConfig corpus;  // camera, keyframe stride, buffer length, warm-up walker
  std::uint64_t seed = 0;
  std::string jsonl_path;
  /// Ends the episode early when it returns true.
  std::function<bool(const Pose6D&, double)> stop;
};

struct CycleRecord {
  int cycle = 0;
  double time = 0.0;
  Pose6D pose;
  std::size_t survivors = 0;
  std::vector<std::size_t> cluster_sizes;
  std::vector<Vec3> centers;  // world frame
  std::vector<double> popularity, momentum_penalty, scores;
  int selected_cluster = -1;
  std::size_t selected = 0;
  std::optional<Vec3> intention;  // world frame, after selection
  double latency = 0.0;
  double latency_estimate = 0.0;
  bool empty = false;
  bool intervention = false;
  Trajectory plan;  // world frame, as executed from handover
};

struct EpisodeLog {
  std::string scene;
  std::uint64_t seed = 0;
  std::vector<CycleRecord> cycles;
  std::vector<Pose6D> path;  // agent pose per 20 Hz tick
  std::vector<double> times;
  std::size_t takeover_tick = 0;  // first controlled tick
  int interventions = 0;
  double end_time = 0.0;
  std::string end_reason;  // "duration", "stop", "stuck"
};

/// Warm-up walk, then the receding-horizon loop: every cycle_period the
/// panorama is rebuilt, B candidates are sampled and filtered, a mode is chosen
/// and its medoid replaces the plan after the simulated latency. Throws NoPath
/// when the warm-up walk does not fill the history.
EpisodeLog run_closed_loop(const SceneSpec& scene, NavCheckpoint& ckpt, const ClosedLoopConfig& cfg);

nlohmann::json cycle_to_json(const CycleRecord& r);
CycleRecord cycle_from_json(const nlohmann::json& j);
/// Reads cycle records written by run_closed_loop. Throws IoFailure / ParseError.
std::vector<CycleRecord> read_episode_jsonl(const std::string& path);

struct EpisodeSummary {
  std::size_t cycles = 0;
  std::size_t empty_cycles = 0;
  int interventions = 0;
  double mean_survivors = 0.0;
  double distance = 0.0;  // along the logged cycle poses
  int intention_switches = 0;  // intention jumps > 1.5 m between cycles
};
EpisodeSummary summarize_episode(const std::vector<CycleRecord>& cycles);

}  // namespace egonav
