#include "egonav/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "egonav/checkpoint.hpp"
#include "egonav/error.hpp"

namespace egonav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

torch::Tensor channel_view(const std::array<double, kTrajChannels>& v, const torch::Tensor& like) {
  return torch::tensor(std::vector<double>(v.begin(), v.end()), torch::kFloat64).to(like.scalar_type());
}

}  // namespace

Normalizer Normalizer::fit(const torch::Tensor& x) {
  const torch::Tensor rows = x.reshape({-1, static_cast<int64_t>(kTrajChannels)}).to(torch::kFloat64);
  const torch::Tensor m = rows.mean(0), s = rows.std(0, false);
  Normalizer n;
  for (std::size_t c = 0; c < kTrajChannels; ++c) {
    n.mean[c] = m[static_cast<int64_t>(c)].item<double>();
    n.stddev[c] = std::max(kStdFloor, s[static_cast<int64_t>(c)].item<double>());
  }
  return n;
}

torch::Tensor Normalizer::apply(const torch::Tensor& x) const {
  return (x - channel_view(mean, x)) / channel_view(stddev, x);
}

torch::Tensor Normalizer::invert(const torch::Tensor& x) const {
  return x * channel_view(stddev, x) + channel_view(mean, x);
}

std::vector<SceneSpec> make_scene_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SceneSpec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(random_scene(static_cast<SceneKind>(i % 8), rng));
    out.back().name += "_" + std::to_string(i);
  }
  return out;
}

Trajectory tensor_to_trajectory(const torch::Tensor& x) {
  const torch::Tensor d = x.detach().to(torch::kCPU, torch::kFloat64).contiguous();
  const auto a = d.accessor<double, 2>();
  Trajectory t;
  t.poses.resize(static_cast<std::size_t>(d.size(0)));
  for (int64_t i = 0; i < d.size(0); ++i) {
    Pose6D& p = t.poses[static_cast<std::size_t>(i)];
    p.position = Vec3(a[i][0], a[i][1], a[i][2]);
    Vec6 o;
    for (int k = 0; k < 6; ++k) o[k] = a[i][3 + k];
    try {
      p.rotation = ortho6d_to_rotation(o);
    } catch (const DegenerateInput&) {
      p.rotation = i > 0 ? t.poses[static_cast<std::size_t>(i - 1)].rotation : Mat3::Identity();
    }
  }
  return t;
}

torch::Tensor trajectory_to_tensor(const Trajectory& t) {
  TrajectoryTensor packed = pack(t, t.size());
  return torch::from_blob(packed.data.data(), {packed.data.rows(), static_cast<int64_t>(kTrajChannels)},
                          torch::kFloat64)
      .to(torch::kFloat32);
}

bool is_junction_sample(const SceneSpec& scene, const Trajectory& walk, const DemoSample& s, double radius) {
  const std::size_t lo = s.past_start + s.past.size(), hi = lo + s.future.size();
  for (int j : scene.junctions) {
    const Vec2 node = scene.graph.nodes[static_cast<std::size_t>(j)];
    double best = radius;
    std::size_t best_i = walk.size();
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const double d = (walk.poses[i].position.head<2>() - node).norm();
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    if (best_i >= lo && best_i < hi) return true;
  }
  return false;
}

Observation observe(const std::vector<std::shared_ptr<const Frame>>& frames, const Pose6D& anchor,
                    const Trajectory& past_world) {
  if (frames.empty()) throw EmptyBuffer("observation needs at least one frame");
  FrameBuffer buf(frames.size());
  for (const auto& f : frames) buf.push(f);
  Observation o;
  o.panorama = build_panorama(buf, anchor);
  o.cloud = panorama_to_pointcloud(o.panorama, kCloudRange);
  o.frame = frame_to_tensor(*frames.back());
  o.past = to_egocentric(past_world, anchor);
  return o;
}

NavDataset collect_dataset(const std::vector<SceneSpec>& scenes, const WalkSource& walks, Vae* encoder) {
  NavDataset d;
  std::vector<torch::Tensor> past, future, frame, latent;
  walks([&](WalkRecord& w) {
    const SceneSpec& scene = scenes.at(w.scene_index);
    for (const DemoSample& s : w.samples) {
      const Observation o = observe(s.frames, s.anchor(), s.past);
      past.push_back(trajectory_to_tensor(o.past));
      future.push_back(trajectory_to_tensor(to_egocentric(s.future, s.anchor())));
      frame.push_back(o.frame.to(torch::kFloat16));
      if (encoder) {
        latent.push_back(encode_panorama(*encoder, o.panorama));
      } else {
        d.panoramas.push_back(panorama_to_tensor(o.panorama).to(torch::kFloat16));
      }
      d.scene_index.push_back(w.scene_index);
      d.junction.push_back(is_junction_sample(scene, w.trajectory, s));
    }
  });
  if (d.size() == 0) throw DataTooSmall("no samples collected");
  d.past = torch::stack(past);
  d.future = torch::stack(future);
  d.frame = torch::stack(frame);
  if (encoder) d.latent = torch::stack(latent);
  return d;
}

torch::Tensor collect_panoramas(const WalkSource& walks, std::size_t stride, std::size_t max) {
  stride = std::max<std::size_t>(1, stride);
  torch::Tensor out = torch::empty({static_cast<int64_t>(max), 5, 180, 360}, torch::kFloat16);
  std::size_t seen = 0, n = 0;
  walks([&](WalkRecord& w) {
    for (const DemoSample& s : w.samples) {
      if (n < max && seen++ % stride == 0) {
        FrameBuffer buf(s.frames.size());
        for (const auto& f : s.frames) buf.push(f);
        out[static_cast<int64_t>(n++)].copy_(panorama_to_tensor(build_panorama(buf, s.anchor())));
      }
    }
  });
  return out.slice(0, 0, static_cast<int64_t>(n));
}

NavCheckpoint make_checkpoint(std::uint64_t seed) {
  torch::manual_seed(seed);
  NavCheckpoint c{Vae(), NavModel(), {}, {}, linear_schedule(), json::object()};
  c.vae->eval();
  c.model->eval();
  return c;
}

namespace {

torch::Tensor norm_tensor(const std::array<double, kTrajChannels>& v) {
  return torch::tensor(std::vector<double>(v.begin(), v.end()), torch::kFloat64).to(torch::kFloat32);
}

void read_norm(const std::map<std::string, torch::Tensor>& t, const std::string& name,
               std::array<double, kTrajChannels>& out) {
  const auto it = t.find(name);
  if (it == t.end() || it->second.numel() != static_cast<int64_t>(kTrajChannels)) {
    throw ParseError("checkpoint lacks " + name);
  }
  for (std::size_t c = 0; c < kTrajChannels; ++c) out[c] = it->second[static_cast<int64_t>(c)].item<double>();
}

}  // namespace

void save_checkpoint(const std::string& dir, NavCheckpoint& ckpt) {
  NamedTensors t = module_tensors(*ckpt.vae, "vae.");
  const NamedTensors m = module_tensors(*ckpt.model, "nav.");
  t.insert(t.end(), m.begin(), m.end());
  t.emplace_back("norm.past_mean", norm_tensor(ckpt.past_norm.mean));
  t.emplace_back("norm.past_std", norm_tensor(ckpt.past_norm.stddev));
  t.emplace_back("norm.future_mean", norm_tensor(ckpt.future_norm.mean));
  t.emplace_back("norm.future_std", norm_tensor(ckpt.future_norm.stddev));
  save_tensors(dir, t);
  json meta = ckpt.meta;
  meta["schedule"] = {{"T", ckpt.schedule.T()},
                      {"beta1", ckpt.schedule.beta.front()},
                      {"betaT", ckpt.schedule.beta.back()}};
  std::ofstream os(fs::path(dir) / "meta.json");
  if (!os) throw IoFailure("cannot write meta.json in " + dir);
  os << meta.dump(2) << '\n';
}

NavCheckpoint load_checkpoint(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / "manifest.txt")) throw IoFailure("no checkpoint at " + dir);
  NavCheckpoint c = make_checkpoint();
  const auto t = load_tensors(dir);
  load_module_tensors(*c.vae, t, "vae.");
  load_module_tensors(*c.model, t, "nav.");
  read_norm(t, "norm.past_mean", c.past_norm.mean);
  read_norm(t, "norm.past_std", c.past_norm.stddev);
  read_norm(t, "norm.future_mean", c.future_norm.mean);
  read_norm(t, "norm.future_std", c.future_norm.stddev);
  std::ifstream is(fs::path(dir) / "meta.json");
  if (is) {
    try {
      c.meta = json::parse(is);
    } catch (const json::exception& e) {
      throw ParseError(std::string("meta.json: ") + e.what());
    }
    if (c.meta.contains("schedule")) {
      const auto& s = c.meta["schedule"];
      c.schedule = linear_schedule(s.value("T", 1000), s.value("beta1", 1e-4), s.value("betaT", 0.02));
    }
  }
  return c;
}

void encode_dataset(NavCheckpoint& ckpt, NavDataset& data, bool release_panoramas) {
  if (data.panoramas.size() != data.size()) throw ShapeMismatch("dataset has no panoramas to encode");
  torch::NoGradGuard ng;
  ckpt.vae->eval();
  std::vector<torch::Tensor> out;
  for (std::size_t s = 0; s < data.panoramas.size(); s += 16) {
    const auto e = std::min(data.panoramas.size(), s + 16);
    const std::vector<torch::Tensor> chunk(data.panoramas.begin() + static_cast<std::ptrdiff_t>(s),
                                           data.panoramas.begin() + static_cast<std::ptrdiff_t>(e));
    out.push_back(ckpt.vae->encode(torch::stack(chunk).to(torch::kFloat32)));
  }
  data.latent = torch::cat(out, 0);
  if (release_panoramas) {
    data.panoramas.clear();
    data.panoramas.shrink_to_fit();
  }
}

DiffusionTrainLog train_diffusion(NavCheckpoint& ckpt, const NavDataset& data, const DiffusionTrainConfig& cfg,
                                  std::size_t min_samples) {
  const auto n = static_cast<int64_t>(data.size());
  if (data.size() < min_samples) {
    throw DataTooSmall("diffusion training needs at least " + std::to_string(min_samples) + " samples, got " +
                       std::to_string(n));
  }
  if (!data.latent.defined() || data.latent.size(0) != n) throw ShapeMismatch("dataset latents missing");
  ckpt.past_norm = Normalizer::fit(data.past);
  ckpt.future_norm = Normalizer::fit(data.future);
  const torch::Tensor past = ckpt.past_norm.apply(data.past);
  const torch::Tensor future = ckpt.future_norm.apply(data.future);

  torch::manual_seed(cfg.seed);
  torch::Generator gen = make_generator(cfg.seed);
  NavModel& model = ckpt.model;
  torch::optim::AdamW opt(model->parameters(), torch::optim::AdamWOptions(cfg.lr).weight_decay(cfg.weight_decay));
  DiffusionTrainLog log;
  log.loss.reserve(static_cast<std::size_t>(cfg.steps));
  const auto t0 = std::chrono::steady_clock::now();
  double running = 1.0;
  for (int step = 0; step < cfg.steps; ++step) {
    double lr = cfg.lr;
    if (step < cfg.warmup) {
      lr *= static_cast<double>(step + 1) / cfg.warmup;
    } else {
      const double p = static_cast<double>(step - cfg.warmup) / std::max(1, cfg.steps - cfg.warmup);
      lr *= 0.1 + 0.9 * 0.5 * (1.0 + std::cos(M_PI * p));
    }
    for (auto& g : opt.param_groups()) static_cast<torch::optim::AdamWOptions&>(g.options()).lr(lr);
    const torch::Tensor idx = torch::randint(0, n, {cfg.batch}, gen, torch::kLong);
    const TrainBatch b{future.index_select(0, idx),
                       {data.latent.index_select(0, idx), data.frame.index_select(0, idx).to(torch::kFloat32),
                        past.index_select(0, idx)}};
    const double l = train_step(model, opt, b, ckpt.schedule, gen, cfg.drop_p, &log.drops);
    log.loss.push_back(l);
    running = 0.98 * running + 0.02 * l;
    if (cfg.verbose && cfg.log_every > 0 && (step + 1) % cfg.log_every == 0) {
      std::cerr << "diffusion step " << step + 1 << " loss " << running << '\n';
    }
  }
  model->eval();
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

void write_loss_csv(const std::string& path, const std::vector<double>& loss, int every) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path);
  os << "step,loss\n";
  for (std::size_t i = 0; i < loss.size(); i += static_cast<std::size_t>(std::max(1, every))) {
    os << i << ',' << loss[i] << '\n';
  }
}

nlohmann::json recipe_to_json(const TrainRecipe& r) {
  return {{"scenes", r.scenes},
          {"samples_per_scene", r.samples_per_scene},
          {"vae_samples", r.vae_samples},
          {"vae", {{"epochs", r.vae.epochs}, {"batch", r.vae.batch}, {"lr", r.vae.lr}, {"mmd_weight", r.vae.mmd_weight}}},
          {"diffusion",
           {{"steps", r.diffusion.steps},
            {"batch", r.diffusion.batch},
            {"lr", r.diffusion.lr},
            {"weight_decay", r.diffusion.weight_decay},
            {"drop_p", r.diffusion.drop_p},
            {"warmup", r.diffusion.warmup}}},
          {"seed", r.seed}};
}

NavCheckpoint train_pipeline(const TrainRecipe& recipe, TrainSummary* summary) {
  using clock = std::chrono::steady_clock;
  const auto seconds_since = [](clock::time_point t) {
    return std::chrono::duration<double>(clock::now() - t).count();
  };
  TrainSummary sum;
  const std::vector<SceneSpec> scenes = make_scene_set(recipe.scenes, recipe.seed);
  const WalkSource walks = [&](const std::function<void(WalkRecord&)>& sink) {
    for_each_walk(scenes, recipe.samples_per_scene, recipe.seed, recipe.corpus, sink);
  };
  NavCheckpoint ckpt = make_checkpoint(recipe.seed);
  auto t0 = clock::now();
  {
    // Evenly strided subset so every scene contributes.
    const std::size_t expected = recipe.scenes * recipe.samples_per_scene;
    const std::size_t stride = std::max<std::size_t>(1, expected / std::max<std::size_t>(1, recipe.vae_samples));
    const torch::Tensor panos = collect_panoramas(walks, stride, recipe.vae_samples);
    sum.corpus_seconds = seconds_since(t0);
    t0 = clock::now();
    VaeTrainConfig vc = recipe.vae;
    vc.seed = recipe.seed;
    vc.verbose = recipe.verbose;
    sum.vae = train_vae(ckpt.vae, panos, vc, recipe.min_vae_samples);
  }
  sum.vae_seconds = seconds_since(t0);
  ckpt.vae->eval();
  for (auto& p : ckpt.vae->parameters()) p.set_requires_grad(false);

  t0 = clock::now();
  NavDataset data = collect_dataset(scenes, walks, &ckpt.vae);
  sum.corpus_seconds += seconds_since(t0);
  sum.samples = data.size();
  for (bool j : data.junction) sum.junction_samples += j ? 1 : 0;
  if (recipe.verbose) {
    std::cerr << "corpus: " << sum.samples << " samples (" << sum.junction_samples << " at junctions), "
              << sum.corpus_seconds << " s of rendering\n";
  }

  DiffusionTrainConfig dc = recipe.diffusion;
  dc.seed = recipe.seed;
  dc.verbose = recipe.verbose;
  sum.diffusion = train_diffusion(ckpt, data, dc, recipe.min_diffusion_samples);
  ckpt.meta["recipe"] = recipe_to_json(recipe);
  ckpt.meta["samples"] = sum.samples;
  if (summary) *summary = std::move(sum);
  return ckpt;
}

torch::Tensor condition_row(NavCheckpoint& ckpt, const torch::Tensor& latent, const torch::Tensor& frame,
                            const Trajectory& past_ego, bool ablate_scene) {
  torch::NoGradGuard ng;
  ckpt.model->eval();
  const torch::Tensor past = ckpt.past_norm.apply(trajectory_to_tensor(past_ego)).unsqueeze(0);
  CondInputs in{latent.unsqueeze(0).to(torch::kFloat32), frame.unsqueeze(0).to(torch::kFloat32), past};
  torch::Tensor c = ckpt.model->embed(in);
  if (ablate_scene) c = drop_slots(c, {kScene, kVideo});
  return c;
}

std::vector<Trajectory> sample_candidates(NavCheckpoint& ckpt, const torch::Tensor& cond, const SampleOptions& opt,
                                          torch::Generator& gen) {
  const torch::Tensor x = ckpt.future_norm.invert(sample_trajectories(ckpt.model, cond, ckpt.schedule, opt, gen));
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(x.size(0)));
  for (int64_t i = 0; i < x.size(0); ++i) out.push_back(tensor_to_trajectory(x[i]));
  return out;
}

std::vector<EvalSample> prepare_eval_samples(NavCheckpoint* ckpt, const std::vector<SceneSpec>& scenes,
                                             const WalkSource& walks, std::size_t max_samples) {
  std::vector<EvalSample> out;
  walks([&](WalkRecord& w) {
    const SceneSpec& scene = scenes.at(w.scene_index);
    for (const DemoSample& s : w.samples) {
      if (max_samples && out.size() >= max_samples) return;
      Observation o = observe(s.frames, s.anchor(), s.past);
      EvalSample e;
      if (ckpt) e.latent = encode_panorama(ckpt->vae, o.panorama);
      e.frame = o.frame;
      e.past = std::move(o.past);
      e.future = to_egocentric(s.future, s.anchor());
      e.cloud = std::move(o.cloud);
      e.junction = is_junction_sample(scene, w.trajectory, s);
      e.scene_index = w.scene_index;
      out.push_back(std::move(e));
    }
  });
  return out;
}

double EvalResult::mean_best_of_1(bool junction_only) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (junction_only && !s.junction) continue;
    sum += s.best_of_1;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double EvalResult::mean_best_of_16(bool junction_only) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (junction_only && !s.junction) continue;
    sum += s.best_of_16;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

std::size_t EvalResult::junction_count() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.junction ? 1 : 0;
  return n;
}

EvalResult evaluate_samples(NavCheckpoint& ckpt, const std::vector<EvalSample>& samples, const EvalOptions& opt) {
  EvalResult r;
  EvalAccumulator acc(opt.k);
  std::ofstream jsonl;
  if (!opt.jsonl_path.empty()) {
    jsonl.open(opt.jsonl_path);
    if (!jsonl) throw IoFailure("cannot write " + opt.jsonl_path);
  }
  double raw_cf = 0.0, raw_sm = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const EvalSample& e = samples[i];
    torch::Generator gen = make_generator(opt.seed + i);
    const torch::Tensor cond = condition_row(ckpt, e.latent, e.frame, e.past, opt.ablate_scene);
    const std::vector<Trajectory> cands = sample_candidates(ckpt, cond, opt.sample, gen);
    const CollisionChecker checker(e.cloud, opt.controller.rule);

    SampleMetrics m;
    m.junction = e.junction;
    std::vector<std::size_t> survivors = filter_collisions(cands, checker);
    m.survivors = survivors.size();
    if (survivors.empty()) {
      m.fallback = true;
      for (std::size_t c = 0; c < cands.size(); ++c) survivors.push_back(c);
    }
    ClusterDecision dec = cluster_candidates(cands, survivors, opt.controller);
    ControllerState state;
    std::size_t sel = score_and_select(dec, cands, state, opt.controller.lambda, Pose6D::identity(),
                                       opt.controller.intention_step);
    if (opt.random_best_of_1) sel = 0;

    for (const Trajectory& c : cands) {
      m.collision_raw += 100.0 * collision_free_score(c, checker);
      m.smoothness_raw += smoothness(c, e.future);
    }
    m.collision_raw /= static_cast<double>(cands.size());
    m.smoothness_raw /= static_cast<double>(cands.size());
    m.collision_selected = 100.0 * collision_free_score(cands[sel], checker);
    m.smoothness_selected = smoothness(cands[sel], e.future);
    m.best_of_1 = ade(cands[sel], e.future);
    m.best_of_k = min_ade_k(cands, e.future, opt.k);
    m.best_of_16 = min_ade_k(cands, e.future, std::min<std::size_t>(16, cands.size()));

    acc.add(m.collision_selected / 100.0, m.smoothness_selected, m.best_of_1, m.best_of_k);
    raw_cf += m.collision_raw;
    raw_sm += m.smoothness_raw;
    r.fallbacks += m.fallback ? 1 : 0;
    if (m.fallback) std::cerr << "eval sample " << i << ": no survivors, selecting among all candidates\n";
    if (jsonl) {
      jsonl << json{{"sample", i},
                    {"scene", e.scene_index},
                    {"junction", e.junction},
                    {"survivors", m.survivors},
                    {"fallback", m.fallback},
                    {"selected", sel},
                    {"collision", m.collision_selected},
                    {"collision_raw", m.collision_raw},
                    {"smoothness", m.smoothness_selected},
                    {"best_of_1", m.best_of_1},
                    {"best_of_k", m.best_of_k},
                    {"best_of_16", m.best_of_16}}
                   .dump()
            << '\n';
    }
    r.samples.push_back(m);
  }
  r.report = acc.report();
  if (!samples.empty()) {
    r.collision_raw = raw_cf / static_cast<double>(samples.size());
    r.smoothness_raw = raw_sm / static_cast<double>(samples.size());
  }
  return r;
}

EvalReport evaluate_ground_truth(const std::vector<EvalSample>& samples, std::size_t k) {
  EvalAccumulator acc(k);
  for (const EvalSample& e : samples) {
    acc.add(collision_free_score(e.future, e.cloud), smoothness(e.future, e.future), 0.0, 0.0);
  }
  return acc.report();
}

std::vector<std::pair<int, int>> default_sweep_grid() {
  return {{0, 1000}, {1000, 0}, {10, 0}, {0, 10}, {5, 5}, {3, 4}, {4, 2}, {2, 2}, {7, 3}, {3, 7}};
}

std::vector<SweepRow> sweep_steps(NavCheckpoint& ckpt, const std::vector<EvalSample>& samples,
                                  const std::vector<std::pair<int, int>>& grid, int64_t batch, double guidance,
                                  std::size_t k, std::uint64_t seed,
                                  const std::function<void(const SweepRow&)>& progress) {
  if (grid.empty()) throw InvalidGrid("step grid is empty");
  for (const auto& [a, b] : grid) {
    if (a < 0 || b < 0 || b > ckpt.schedule.T()) throw InvalidGrid("bad step pair " + std::to_string(a) + "+" + std::to_string(b));
  }
  if (samples.empty()) throw DataTooSmall("sweep needs at least one sample");
  std::vector<SweepRow> rows;
  std::vector<torch::Tensor> conds;
  for (const EvalSample& e : samples) conds.push_back(condition_row(ckpt, e.latent, e.frame, e.past));
  for (const auto& [a, b] : grid) {
    if (a == 0 && b == 0) continue;
    SweepRow row{a, b, 0.0, 0.0, 0.0};
    const SampleOptions opt{a, b, batch, guidance};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      torch::Generator gen = make_generator(seed + i);
      const std::vector<Trajectory> cands = sample_candidates(ckpt, conds[i], opt, gen);
      const CollisionChecker checker(samples[i].cloud);
      double cf = 0.0, sm = 0.0;
      for (const Trajectory& c : cands) {
        cf += collision_free_score(c, checker);
        sm += smoothness(c, samples[i].future);
      }
      row.collision += 100.0 * cf / static_cast<double>(cands.size());
      row.smoothness += sm / static_cast<double>(cands.size());
      row.best_of_k += min_ade_k(cands, samples[i].future, std::min<std::size_t>(k, cands.size()));
    }
    const auto n = static_cast<double>(samples.size());
    row.collision /= n;
    row.smoothness /= n;
    row.best_of_k /= n;
    rows.push_back(row);
    if (progress) progress(row);
  }
  return rows;
}

std::string sweep_csv_header() { return "n_ddim,n_ddpm,collision,smoothness,best_of_k"; }

std::string sweep_csv_row(const SweepRow& r) {
  std::ostringstream os;
  os.precision(6);
  os << r.n_ddim << ',' << r.n_ddpm << ',' << r.collision << ',' << r.smoothness << ',' << r.best_of_k;
  return os.str();
}

}  // namespace egonav
