#include "egonav/closed_loop.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <random>

#include "egonav/error.hpp"

namespace egonav {

using nlohmann::json;

namespace {

Trajectory hold_plan(const Pose6D& p) {
  Trajectory t;
  t.poses.assign(kHorizon, p);
  return t;
}

Trajectory drop_front(const Trajectory& t, std::size_t n) {
  Trajectory out;
  if (n < t.size()) out.poses.assign(t.poses.begin() + static_cast<std::ptrdiff_t>(n), t.poses.end());
  return out;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

// The plan a cycle hands to the follower; `t0` is the time of poses[0].
struct ActivePlan {
  Trajectory plan;
  double t0 = 0.0;
};

struct PendingPlan {
  Trajectory plan;  // world frame, poses[0] at t0
  double t0 = 0.0;
  double ready = 0.0;
  std::size_t record = 0;
  bool hold = false;  // stop where the agent is at handover
};

}  // namespace

EpisodeLog run_closed_loop(const SceneSpec& scene, NavCheckpoint& ckpt, const ClosedLoopConfig& cfg) {
  const double dt = 1.0 / kRateHz;
  const auto ticks_for = [&](double s) { return static_cast<std::size_t>(std::llround(s * kRateHz)); };
  const std::size_t warm_ticks = ticks_for(cfg.warmup);
  const std::size_t total_ticks = ticks_for(cfg.duration);
  const std::size_t cycle_ticks = std::max<std::size_t>(1, ticks_for(cfg.cycle_period));
  const std::size_t history = cfg.corpus.frame_stride * (cfg.corpus.frames_per_sample - 1) + 1;
  if (warm_ticks + 1 < kHorizon) throw InvalidRange("warm-up must cover the 5 s past window");

  const Trajectory warm = generate_demo_trajectory(scene, scene.spawn_pose(cfg.spawn), cfg.seed, cfg.corpus.walker);
  if (warm.size() <= warm_ticks) throw NoPath("warm-up walk ends before the controller takes over");

  std::ofstream jsonl;
  if (!cfg.jsonl_path.empty()) {
    jsonl.open(cfg.jsonl_path);
    if (!jsonl) throw IoFailure("cannot write " + cfg.jsonl_path);
  }

  EpisodeLog log;
  log.scene = scene.name;
  log.seed = cfg.seed;
  log.takeover_tick = warm_ticks + 1;
  std::deque<std::shared_ptr<const Frame>> frames;  // one per tick, newest last
  const auto render = [&](const Pose6D& p, double t) {
    Frame f = raycast_frame(scene, p, cfg.corpus.camera, t);
    if (cfg.corpus.clean_depth) clean_frame(f);
    frames.push_back(std::make_shared<const Frame>(std::move(f)));
    while (frames.size() > history) frames.pop_front();
  };
  for (std::size_t i = 0; i <= warm_ticks; ++i) {
    log.path.push_back(warm.poses[i]);
    log.times.push_back(static_cast<double>(i) * dt);
    render(warm.poses[i], log.times.back());
  }

  ControllerState state;
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-cfg.latency_jitter, cfg.latency_jitter);
  // Until the first plan lands the agent keeps the warm-up walk's remainder.
  ActivePlan active{drop_front(warm, warm_ticks + 1), static_cast<double>(warm_ticks + 1) * dt};
  std::optional<PendingPlan> pending;
  int empty_run = 0;
  int cycle = 0;
  log.end_reason = "duration";

  for (std::size_t tick = warm_ticks;; ++tick) {
    const double now = static_cast<double>(tick) * dt;
    const Pose6D& pose = log.path.back();

    if (pending && now + 1e-9 >= pending->ready) {
      Trajectory next = pending->plan;
      double t0 = pending->t0;
      // Align the old plan with the new one's first pose and cross-fade.
      const double shift = (t0 - active.t0) * kRateHz;
      const Trajectory prev = drop_front(active.plan, static_cast<std::size_t>(std::max(0.0, std::round(shift))));
      if (!pending->hold && !prev.poses.empty() && !next.poses.empty()) {
        next = blend(prev, next, cfg.controller.blend_window);
      }
      if (pending->hold || next.poses.empty()) {
        next = hold_plan(pose);
        t0 = now;
      }
      active = {std::move(next), t0};
      log.cycles[pending->record].plan = active.plan;
      if (jsonl) jsonl << cycle_to_json(log.cycles[pending->record]).dump() << '\n';
      pending.reset();
    }

    if (tick >= total_ticks) break;
    if (cfg.stop && tick > warm_ticks && cfg.stop(pose, now)) {
      log.end_reason = "stop";
      break;
    }

    if ((tick - warm_ticks) % cycle_ticks == 0) {
      CycleRecord rec;
      rec.cycle = cycle;
      rec.time = now;
      rec.pose = pose;
      std::vector<std::shared_ptr<const Frame>> buf;
      for (std::size_t k = 0; k < cfg.corpus.frames_per_sample; ++k) {
        const std::size_t back = (cfg.corpus.frames_per_sample - 1 - k) * cfg.corpus.frame_stride;
        if (back < frames.size()) buf.push_back(frames[frames.size() - 1 - back]);
      }
      Trajectory past_world;
      past_world.poses.assign(log.path.end() - static_cast<std::ptrdiff_t>(kHorizon), log.path.end());
      const Observation obs = observe(buf, pose, past_world);
      const torch::Tensor latent = encode_panorama(ckpt.vae, obs.panorama);
      const torch::Tensor cond = condition_row(ckpt, latent, obs.frame, obs.past);
      torch::Generator gen = make_generator(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(cycle));
      const std::vector<Trajectory> cands = sample_candidates(ckpt, cond, cfg.sample, gen);
      const CollisionChecker checker(obs.cloud, cfg.controller.rule);
      const std::vector<std::size_t> survivors = filter_collisions(cands, checker);
      rec.survivors = survivors.size();

      rec.latency = std::max(0.0, cfg.latency + jitter(rng));
      state.observe_latency(rec.latency, cfg.controller.latency_alpha);
      rec.latency_estimate = state.latency_estimate;

      PendingPlan next;
      next.ready = now + rec.latency;
      if (survivors.empty()) {
        rec.empty = true;
        ++empty_run;
        next.hold = true;
      } else {
        empty_run = 0;
        ClusterDecision dec = cluster_candidates(cands, survivors, cfg.controller);
        rec.selected =
            score_and_select(dec, cands, state, cfg.controller.lambda, pose, cfg.controller.intention_step);
        rec.selected_cluster = dec.selected_cluster;
        for (std::size_t c = 0; c < dec.clusters.size(); ++c) {
          rec.cluster_sizes.push_back(dec.clusters[c].size());
          rec.centers.push_back(pose.position + pose.rotation * dec.centers[c]);
        }
        rec.popularity = dec.popularity;
        rec.momentum_penalty = dec.momentum_penalty;
        rec.scores = dec.scores;
        rec.intention = state.prev_intention;
        // Candidate step j lies at now + (j + 1)·dt.
        const std::size_t trim = static_cast<std::size_t>(std::llround(state.latency_estimate * kRateHz));
        next.plan = compensate_latency(to_world(cands[rec.selected], pose), state.latency_estimate);
        next.t0 = now + static_cast<double>(trim + 1) * dt;
      }
      if (empty_run >= cfg.max_empty_cycles) {
        rec.intervention = true;
        ++log.interventions;
      }
      next.record = log.cycles.size();
      log.cycles.push_back(std::move(rec));
      pending = std::move(next);
      ++cycle;
      if (log.cycles.back().intervention) {
        if (jsonl) jsonl << cycle_to_json(log.cycles.back()).dump() << '\n';
        log.end_reason = "stuck";
        log.end_time = now;
        if (cfg.raise_on_stuck) {
          throw AgentStuck("no collision-free candidates for " + std::to_string(empty_run) + " cycles at t=" +
                           std::to_string(now));
        }
        return log;
      }
    }

    // Pure pursuit towards the plan point `lookahead` ahead of now. Heading
    // follows the plan's path tangent over the same window and is kept while
    // the plan is (nearly) stationary.
    Vec3 target = pose.position;
    double yaw = pose.yaw();
    if (!active.plan.poses.empty()) {
      const double last = static_cast<double>(active.plan.size() - 1);
      const auto at = [&](double t) {
        return static_cast<std::size_t>(std::clamp(std::round((t - active.t0) * kRateHz), 0.0, last));
      };
      target = active.plan.poses[at(now + cfg.lookahead)].position;
      const Vec3 tangent = target - active.plan.poses[at(now)].position;
      if (tangent.head<2>().norm() > cfg.heading_min_speed * cfg.lookahead) yaw = std::atan2(tangent.y(), tangent.x());
    }
    Vec3 v = (target - pose.position) / cfg.lookahead;
    v.z() = 0.0;
    const double speed = v.norm();
    if (speed > cfg.speed_cap) v *= cfg.speed_cap / speed;
    const Vec3 p = pose.position + v * dt;
    log.path.push_back(Pose6D::from_yaw(p, yaw));
    log.times.push_back(now + dt);
    render(log.path.back(), now + dt);
  }
  if (pending && jsonl) jsonl << cycle_to_json(log.cycles[pending->record]).dump() << '\n';
  log.end_time = log.times.back();
  return log;
}

json cycle_to_json(const CycleRecord& r) {
  json centers = json::array(), plan = json::array();
  for (const Vec3& c : r.centers) centers.push_back(vec_json(c));
  for (std::size_t i = 0; i < r.plan.size(); i += 5) plan.push_back(vec_json(r.plan.poses[i].position));
  return {{"cycle", r.cycle},
          {"time", r.time},
          {"pose", {{"position", vec_json(r.pose.position)}, {"yaw", r.pose.yaw()}}},
          {"survivors", r.survivors},
          {"cluster_sizes", r.cluster_sizes},
          {"centers", centers},
          {"popularity", r.popularity},
          {"momentum_penalty", r.momentum_penalty},
          {"scores", r.scores},
          {"selected_cluster", r.selected_cluster},
          {"selected", r.selected},
          {"intention", r.intention ? vec_json(*r.intention) : json(nullptr)},
          {"latency", r.latency},
          {"latency_estimate", r.latency_estimate},
          {"empty", r.empty},
          {"intervention", r.intervention},
          {"plan_every_5", plan}};
}

CycleRecord cycle_from_json(const json& j) {
  CycleRecord r;
  r.cycle = j.at("cycle").get<int>();
  r.time = j.at("time").get<double>();
  r.pose = Pose6D::from_yaw(vec_from(j.at("pose").at("position")), j.at("pose").at("yaw").get<double>());
  r.survivors = j.at("survivors").get<std::size_t>();
  r.cluster_sizes = j.at("cluster_sizes").get<std::vector<std::size_t>>();
  for (const auto& c : j.at("centers")) r.centers.push_back(vec_from(c));
  r.popularity = j.at("popularity").get<std::vector<double>>();
  r.momentum_penalty = j.at("momentum_penalty").get<std::vector<double>>();
  r.scores = j.at("scores").get<std::vector<double>>();
  r.selected_cluster = j.at("selected_cluster").get<int>();
  r.selected = j.at("selected").get<std::size_t>();
  if (!j.at("intention").is_null()) r.intention = vec_from(j.at("intention"));
  r.latency = j.at("latency").get<double>();
  r.latency_estimate = j.at("latency_estimate").get<double>();
  r.empty = j.at("empty").get<bool>();
  r.intervention = j.at("intervention").get<bool>();
  for (const auto& p : j.at("plan_every_5")) r.plan.poses.push_back(Pose6D::from_yaw(vec_from(p), 0.0));
  return r;
}

std::vector<CycleRecord> read_episode_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot read " + path);
  std::vector<CycleRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(cycle_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

EpisodeSummary summarize_episode(const std::vector<CycleRecord>& cycles) {
  EpisodeSummary s;
  s.cycles = cycles.size();
  std::optional<Vec3> last;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    const CycleRecord& c = cycles[i];
    s.empty_cycles += c.empty ? 1 : 0;
    s.interventions += c.intervention ? 1 : 0;
    s.mean_survivors += static_cast<double>(c.survivors);
    if (i > 0) s.distance += (c.pose.position - cycles[i - 1].pose.position).head<2>().norm();
    if (c.intention) {
      if (last && (*c.intention - *last).norm() > 1.5) ++s.intention_switches;
      last = c.intention;
    }
  }
  if (!cycles.empty()) s.mean_survivors /= static_cast<double>(cycles.size());
  return s;
}

}  // namespace egonav
