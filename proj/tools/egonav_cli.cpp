// egonav: corpus generation, training, evaluation and closed-loop simulation.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "egonav/closed_loop.hpp"
#include "egonav/error.hpp"
#include "egonav/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace egonav;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Paths {
  std::string scene_dir = "scenes";
  std::string corpus_dir = "corpus";
  std::string checkpoint = "checkpoint";
  std::string output = "egonav_out";
};

struct Options {
  Paths paths;
  std::uint64_t seed = 0;
  // generation
  std::size_t n_scenes = 40;
  std::size_t samples_per_scene = 60;
  // training
  int vae_epochs = 12;
  std::size_t vae_panoramas = 1000;
  int steps = 12000;
  int64_t train_batch = 64;
  double lr = 1e-3;
  // sampling
  SampleOptions sample;
  double lambda = 0.3;
  double latency = 0.3;
  double latency_jitter = 0.1;
  // evaluation
  std::size_t k = 15;
  std::size_t max_samples = 0;
  bool ground_truth = false;
  bool ablate_scene = false;
  bool random_best_of_1 = false;
  bool jsonl = false;
  std::string grid;
  // scenes and episodes
  std::string scene = "tjunction";
  double duration = 30.0;
  double warmup = 5.0;
  int max_empty = 5;
  std::string log;
};

json options_json(const std::string& command, const Options& o) {
  return {{"command", command},
          {"paths",
           {{"scene_dir", o.paths.scene_dir},
            {"corpus_dir", o.paths.corpus_dir},
            {"checkpoint", o.paths.checkpoint},
            {"output", o.paths.output}}},
          {"seed", o.seed},
          {"n_scenes", o.n_scenes},
          {"samples_per_scene", o.samples_per_scene},
          {"vae_epochs", o.vae_epochs},
          {"vae_panoramas", o.vae_panoramas},
          {"steps", o.steps},
          {"train_batch", o.train_batch},
          {"lr", o.lr},
          {"ddim", o.sample.n_ddim},
          {"ddpm", o.sample.n_ddpm},
          {"batch", o.sample.batch},
          {"guidance", o.sample.guidance},
          {"lambda", o.lambda},
          {"latency", o.latency},
          {"latency_jitter", o.latency_jitter},
          {"k", o.k},
          {"max_samples", o.max_samples},
          {"ground_truth", o.ground_truth},
          {"ablate_scene", o.ablate_scene},
          {"random_best_of_1", o.random_best_of_1},
          {"grid", o.grid},
          {"scene", o.scene},
          {"duration", o.duration},
          {"warmup", o.warmup},
          {"max_empty_cycles", o.max_empty},
          {"log", o.log}};
}

fs::path output_dir(const Options& o) {
  fs::create_directories(o.paths.output);
  return o.paths.output;
}

void write_manifest(const std::string& command, const Options& o, const json& extra = json::object()) {
  json m = options_json(command, o);
  m["results"] = extra;
  std::ofstream os(output_dir(o) / "manifest.json");
  if (!os) throw IoFailure("cannot write manifest in " + o.paths.output);
  os << m.dump(2) << '\n';
}

NavCheckpoint require_checkpoint(const Options& o) {
  if (!fs::exists(fs::path(o.paths.checkpoint) / "manifest.txt")) {
    throw UsageError("--checkpoint: no checkpoint at '" + o.paths.checkpoint + "'");
  }
  return load_checkpoint(o.paths.checkpoint);
}

std::vector<SceneSpec> load_scene_dir(const fs::path& dir, const std::string& flag) {
  if (!fs::is_directory(dir)) throw UsageError(flag + ": no scene directory at '" + dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SceneSpec> scenes;
  for (const auto& f : files) scenes.push_back(load_scene(f.string()));
  return scenes;
}

// Corpus directories written by gen-corpus carry their scenes under scenes/.
std::vector<SceneSpec> corpus_scenes(const Options& o) {
  const fs::path c = o.paths.corpus_dir;
  if (!fs::exists(c / "manifest.json")) throw UsageError("--corpus-dir: no corpus at '" + c.string() + "'");
  return load_scene_dir(c / "scenes", "--corpus-dir");
}

WalkSource corpus_walks(const Options& o) {
  const std::string dir = o.paths.corpus_dir;
  return [dir](const std::function<void(WalkRecord&)>& sink) { read_corpus(dir, sink); };
}

// A scene file, or a layout kind randomised under the seed.
SceneSpec resolve_scene(const Options& o) {
  if (fs::exists(o.scene)) return load_scene(o.scene);
  try {
    std::mt19937_64 rng(o.seed);
    return random_scene(kind_from_name(o.scene), rng);
  } catch (const ParseError&) {
    throw UsageError("--scene: '" + o.scene + "' is neither a scene file nor a layout kind");
  }
}

std::vector<std::pair<int, int>> parse_grid(const std::string& text) {
  if (text.empty()) return default_sweep_grid();
  std::vector<std::pair<int, int>> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto plus = item.find('+');
    try {
      if (plus == std::string::npos) throw std::invalid_argument(item);
      grid.emplace_back(std::stoi(item.substr(0, plus)), std::stoi(item.substr(plus + 1)));
    } catch (const std::logic_error&) {
      throw UsageError("--grid: expected DDIM+DDPM pairs, got '" + item + "'");
    }
  }
  return grid;
}

void write_trajectories_csv(const fs::path& path, const std::vector<Trajectory>& trajs) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path.string());
  os << "candidate,step,x,y,z\n";
  for (std::size_t c = 0; c < trajs.size(); ++c) {
    for (std::size_t i = 0; i < trajs[c].size(); ++i) {
      const Vec3& p = trajs[c].poses[i].position;
      os << c << ',' << i << ',' << p.x() << ',' << p.y() << ',' << p.z() << '\n';
    }
  }
}

// Scripted walk from the first spawn up to `warmup`, as the agent would have seen it.
Observation warmup_observation(const SceneSpec& scene, const Options& o, Pose6D& anchor) {
  const CorpusConfig cc;
  const Trajectory walk = generate_demo_trajectory(scene, scene.spawn_pose(0), o.seed, cc.walker);
  const auto end = static_cast<std::size_t>(std::llround(o.warmup * kRateHz));
  if (end + 1 < kHorizon || end >= walk.size()) throw UsageError("--warmup: walk too short for a 5 s history");
  std::vector<std::shared_ptr<const Frame>> frames;
  for (std::size_t step : keyframe_steps(end, cc)) {
    Frame f = raycast_frame(scene, walk.poses[step], cc.camera, static_cast<double>(step) / kRateHz);
    clean_frame(f);
    frames.push_back(std::make_shared<const Frame>(std::move(f)));
  }
  Trajectory past;
  past.poses.assign(walk.poses.begin() + static_cast<std::ptrdiff_t>(end + 1 - kHorizon),
                    walk.poses.begin() + static_cast<std::ptrdiff_t>(end + 1));
  anchor = walk.poses[end];
  return observe(frames, anchor, past);
}

int cmd_gen_scenes(const Options& o) {
  const std::vector<SceneSpec> scenes = make_scene_set(o.n_scenes, o.seed);
  if (!scenes.empty()) fs::create_directories(o.paths.scene_dir);
  json names = json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    scenes[i].validate();
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu.json", i);
    save_scene((fs::path(o.paths.scene_dir) / name).string(), scenes[i]);
    names.push_back(scenes[i].name);
  }
  write_manifest("gen-scenes", o, {{"scenes", names}});
  std::cout << "wrote " << scenes.size() << " scenes to " << o.paths.scene_dir << '\n';
  return 0;
}

int cmd_gen_corpus(const Options& o) {
  const std::vector<SceneSpec> scenes = load_scene_dir(o.paths.scene_dir, "--scene-dir");
  if (scenes.empty()) throw UsageError("--scene-dir: no scene files in '" + o.paths.scene_dir + "'");
  write_corpus(o.paths.corpus_dir, scenes, o.samples_per_scene, o.seed);
  const fs::path sd = fs::path(o.paths.corpus_dir) / "scenes";
  fs::create_directories(sd);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu.json", i);
    save_scene((sd / name).string(), scenes[i]);
  }
  std::ifstream is(fs::path(o.paths.corpus_dir) / "manifest.json");
  const json cm = json::parse(is);
  write_manifest("gen-corpus", o, {{"n_samples", cm.value("n_samples", 0)}});
  std::cout << "wrote " << cm.value("n_samples", 0) << " samples to " << o.paths.corpus_dir << '\n';
  return 0;
}

int cmd_train_vae(const Options& o) {
  const std::vector<SceneSpec> scenes = corpus_scenes(o);
  std::ifstream is(fs::path(o.paths.corpus_dir) / "manifest.json");
  const std::size_t total = json::parse(is).value("n_samples", std::size_t{0});
  const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, o.vae_panoramas));
  const torch::Tensor panos = collect_panoramas(corpus_walks(o), stride, o.vae_panoramas);
  NavCheckpoint ckpt = make_checkpoint(o.seed);
  VaeTrainConfig vc;
  vc.epochs = o.vae_epochs;
  vc.seed = o.seed;
  vc.verbose = true;
  const VaeTrainResult r = train_vae(ckpt.vae, panos, vc);
  ckpt.meta["vae"] = {{"epochs", vc.epochs}, {"panoramas", panos.size(0)}};
  fs::create_directories(o.paths.checkpoint);
  save_checkpoint(o.paths.checkpoint, ckpt);
  std::ofstream csv(output_dir(o) / "vae_loss.csv");
  csv << "epoch,l1_observed,l1_all,ce,mmd,semantic_accuracy\n";
  for (std::size_t e = 0; e < r.epochs.size(); ++e) {
    const VaeLosses& l = r.epochs[e];
    csv << e << ',' << l.l1_observed << ',' << l.l1_all << ',' << l.ce << ',' << l.mmd << ',' << l.semantic_accuracy
        << '\n';
  }
  write_manifest("train-vae", o,
                 {{"l1_observed", r.final.l1_observed}, {"semantic_accuracy", r.final.semantic_accuracy}});
  return 0;
}

int cmd_train_diffusion(const Options& o) {
  NavCheckpoint ckpt = require_checkpoint(o);
  const std::vector<SceneSpec> scenes = corpus_scenes(o);
  ckpt.vae->eval();
  const NavDataset data = collect_dataset(scenes, corpus_walks(o), &ckpt.vae);
  DiffusionTrainConfig dc;
  dc.steps = o.steps;
  dc.batch = o.train_batch;
  dc.lr = o.lr;
  dc.seed = o.seed;
  dc.verbose = true;
  const DiffusionTrainLog log = train_diffusion(ckpt, data, dc);
  ckpt.meta["diffusion"] = {{"steps", dc.steps}, {"batch", dc.batch}, {"lr", dc.lr}, {"samples", data.size()}};
  save_checkpoint(o.paths.checkpoint, ckpt);
  write_loss_csv((output_dir(o) / "diffusion_loss.csv").string(), log.loss, 10);
  write_manifest("train-diffusion", o,
                 {{"samples", data.size()},
                  {"seconds", log.seconds},
                  {"drop_rate", {log.drops.rate(kScene), log.drops.rate(kVideo), log.drops.rate(kPast)}}});
  return 0;
}

int cmd_sample(const Options& o) {
  NavCheckpoint ckpt = require_checkpoint(o);
  const SceneSpec scene = resolve_scene(o);
  Pose6D anchor;
  const Observation obs = warmup_observation(scene, o, anchor);
  const torch::Tensor cond = condition_row(ckpt, encode_panorama(ckpt.vae, obs.panorama), obs.frame, obs.past);
  torch::Generator gen = make_generator(o.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Trajectory> cands = sample_candidates(ckpt, cond, o.sample, gen);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const CollisionChecker checker(obs.cloud);
  const std::vector<std::size_t> survivors = filter_collisions(cands, checker);
  json sel = nullptr;
  if (!survivors.empty()) {
    ControllerConfig cc;
    ClusterDecision dec = cluster_candidates(cands, survivors, cc);
    ControllerState state;
    sel = score_and_select(dec, cands, state, o.lambda);
  }
  write_trajectories_csv(output_dir(o) / "samples.csv", cands);
  write_manifest("sample", o,
                 {{"scene", scene.name}, {"seconds", seconds}, {"survivors", survivors.size()}, {"selected", sel}});
  std::cout << cands.size() << " candidates, " << survivors.size() << " collision-free, " << seconds << " s\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const std::vector<SceneSpec> scenes = corpus_scenes(o);
  std::ofstream csv;
  const auto open_csv = [&] {
    csv.open(output_dir(o) / "eval.csv");
    if (!csv) throw IoFailure("cannot write eval.csv");
    csv << eval_csv_header(o.k) << '\n';
  };
  if (o.ground_truth) {
    const auto samples = prepare_eval_samples(nullptr, scenes, corpus_walks(o), o.max_samples);
    const EvalReport r = evaluate_ground_truth(samples, o.k);
    open_csv();
    csv << eval_csv_row(r) << '\n';
    std::cout << eval_csv_header(o.k) << '\n' << eval_csv_row(r) << '\n';
    write_manifest("eval", o, {{"collision", r.collision_free}, {"n", r.n_samples}});
    return 0;
  }
  NavCheckpoint ckpt = require_checkpoint(o);
  const auto samples = prepare_eval_samples(&ckpt, scenes, corpus_walks(o), o.max_samples);
  EvalOptions eo;
  eo.sample = o.sample;
  eo.controller.lambda = o.lambda;
  eo.k = o.k;
  eo.random_best_of_1 = o.random_best_of_1;
  eo.ablate_scene = o.ablate_scene;
  eo.seed = o.seed;
  if (o.jsonl) eo.jsonl_path = (output_dir(o) / "eval_samples.jsonl").string();
  const EvalResult r = evaluate_samples(ckpt, samples, eo);
  open_csv();
  csv << eval_csv_row(r.report) << '\n';
  std::cout << eval_csv_header(o.k) << '\n' << eval_csv_row(r.report) << '\n';
  write_manifest("eval", o,
                 {{"collision", r.report.collision_free},
                  {"collision_raw", r.collision_raw},
                  {"fallbacks", r.fallbacks},
                  {"junction_samples", r.junction_count()},
                  {"junction_best_of_1", r.mean_best_of_1(true)},
                  {"junction_best_of_16", r.mean_best_of_16(true)}});
  return 0;
}

int cmd_sweep_steps(const Options& o) {
  const auto grid = parse_grid(o.grid);
  NavCheckpoint ckpt = require_checkpoint(o);
  const std::vector<SceneSpec> scenes = corpus_scenes(o);
  const auto samples = prepare_eval_samples(&ckpt, scenes, corpus_walks(o), o.max_samples ? o.max_samples : 16);
  std::ofstream csv(output_dir(o) / "sweep.csv");
  if (!csv) throw IoFailure("cannot write sweep.csv");
  csv << sweep_csv_header() << '\n';
  std::cout << sweep_csv_header() << '\n';
  std::vector<SweepRow> rows;
  try {
    rows = sweep_steps(ckpt, samples, grid, o.sample.batch, o.sample.guidance, o.k, o.seed, [&](const SweepRow& r) {
      csv << sweep_csv_row(r) << '\n' << std::flush;
      std::cout << sweep_csv_row(r) << '\n' << std::flush;
    });
  } catch (const InvalidGrid& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
  write_manifest("sweep-steps", o, {{"rows", rows.size()}, {"samples", samples.size()}});
  return 0;
}

int cmd_simulate(const Options& o) {
  NavCheckpoint ckpt = require_checkpoint(o);
  const SceneSpec scene = resolve_scene(o);
  ClosedLoopConfig cfg;
  cfg.duration = o.duration;
  cfg.warmup = o.warmup;
  cfg.latency = o.latency;
  cfg.latency_jitter = o.latency_jitter;
  cfg.max_empty_cycles = o.max_empty;
  cfg.sample = o.sample;
  cfg.controller.lambda = o.lambda;
  cfg.seed = o.seed;
  cfg.jsonl_path = (output_dir(o) / "episode.jsonl").string();
  const EpisodeLog log = run_closed_loop(scene, ckpt, cfg);
  std::ofstream path(output_dir(o) / "path.csv");
  path << "time,x,y,z,yaw\n";
  for (std::size_t i = 0; i < log.path.size(); ++i) {
    const Pose6D& p = log.path[i];
    path << log.times[i] << ',' << p.position.x() << ',' << p.position.y() << ',' << p.position.z() << ','
         << p.yaw() << '\n';
  }
  const EpisodeSummary s = summarize_episode(log.cycles);
  write_manifest("simulate", o,
                 {{"scene", scene.name},
                  {"cycles", s.cycles},
                  {"interventions", log.interventions},
                  {"end_reason", log.end_reason},
                  {"end_time", log.end_time}});
  std::cout << scene.name << ": " << s.cycles << " cycles, " << log.interventions << " interventions, ended by "
            << log.end_reason << " at " << log.end_time << " s\n";
  return 0;
}

int cmd_report(const Options& o) {
  if (o.log.empty()) throw UsageError("--log: episode log path required");
  if (!fs::exists(o.log)) throw UsageError("--log: no file at '" + o.log + "'");
  const EpisodeSummary s = summarize_episode(read_episode_jsonl(o.log));
  const json r = {{"cycles", s.cycles},
                  {"empty_cycles", s.empty_cycles},
                  {"interventions", s.interventions},
                  {"mean_survivors", s.mean_survivors},
                  {"distance", s.distance},
                  {"intention_switches", s.intention_switches}};
  std::ofstream(output_dir(o) / "report.json") << r.dump(2) << '\n';
  write_manifest("report", o, r);
  std::cout << r.dump(2) << '\n';
  return 0;
}

int cmd_render_panorama(const Options& o) {
  const SceneSpec scene = resolve_scene(o);
  Pose6D anchor;
  const Observation obs = warmup_observation(scene, o, anchor);
  const fs::path out = output_dir(o);
  save_panorama((out / "panorama.bin").string(), obs.panorama);
  write_panorama_ppm((out / "panorama_rgb.ppm").string(), obs.panorama, PanoView::Rgb);
  write_panorama_ppm((out / "panorama_depth.ppm").string(), obs.panorama, PanoView::Depth);
  write_panorama_ppm((out / "panorama_semantic.ppm").string(), obs.panorama, PanoView::Semantic);
  write_manifest("render-panorama", o, {{"scene", scene.name}, {"cloud_points", obs.cloud.size()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  torch::set_num_threads(1);
  Options o;
  CLI::App app{"Scene-conditioned navigation prior: data, training, evaluation and simulation"};
  app.require_subcommand(1);

  const auto add_paths = [&](CLI::App* c, bool scenes, bool corpus, bool ckpt) {
    if (scenes) c->add_option("--scene-dir", o.paths.scene_dir, "Scene directory")->envname("EGONAV_SCENE_DIR");
    if (corpus) c->add_option("--corpus-dir", o.paths.corpus_dir, "Corpus directory")->envname("EGONAV_CORPUS_DIR");
    if (ckpt) c->add_option("--checkpoint", o.paths.checkpoint, "Checkpoint directory")->envname("EGONAV_CHECKPOINT");
    c->add_option("--output", o.paths.output, "Output directory")->envname("EGONAV_OUTPUT");
    c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  };
  const auto add_sampling = [&](CLI::App* c) {
    c->add_option("--ddim", o.sample.n_ddim, "DDIM steps")->capture_default_str();
    c->add_option("--ddpm", o.sample.n_ddpm, "DDPM steps")->capture_default_str();
    c->add_option("--batch", o.sample.batch, "Candidates per decision")->capture_default_str();
    c->add_option("--guidance", o.sample.guidance, "Guidance weight")->capture_default_str();
    c->add_option("--lambda", o.lambda, "Momentum weight (1/m)")->capture_default_str();
  };
  const auto add_scene = [&](CLI::App* c) {
    c->add_option("--scene", o.scene, "Scene file or layout kind")->capture_default_str();
    c->add_option("--warmup", o.warmup, "Scripted history before the decision (s)")->capture_default_str();
  };

  auto* gen_scenes = app.add_subcommand("gen-scenes", "Write randomised scenes");
  add_paths(gen_scenes, true, false, false);
  gen_scenes->add_option("--n", o.n_scenes, "Number of scenes")->capture_default_str();

  auto* gen_corpus = app.add_subcommand("gen-corpus", "Render demonstration walks");
  add_paths(gen_corpus, true, true, false);
  gen_corpus->add_option("--samples-per-scene", o.samples_per_scene)->capture_default_str();

  auto* train_vae_cmd = app.add_subcommand("train-vae", "Train the panorama autoencoder");
  add_paths(train_vae_cmd, false, true, true);
  train_vae_cmd->add_option("--epochs", o.vae_epochs)->capture_default_str();
  train_vae_cmd->add_option("--panoramas", o.vae_panoramas, "Panoramas used for training")->capture_default_str();

  auto* train_diff = app.add_subcommand("train-diffusion", "Train the trajectory denoiser");
  add_paths(train_diff, false, true, true);
  train_diff->add_option("--steps", o.steps)->capture_default_str();
  train_diff->add_option("--train-batch", o.train_batch)->capture_default_str();
  train_diff->add_option("--lr", o.lr)->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Sample candidates at one decision point");
  add_paths(sample, false, false, true);
  add_sampling(sample);
  add_scene(sample);

  auto* eval = app.add_subcommand("eval", "Offline metrics on a held-out corpus");
  add_paths(eval, false, true, true);
  add_sampling(eval);
  eval->add_option("--k", o.k, "Best-of-K")->capture_default_str();
  eval->add_option("--max-samples", o.max_samples, "0 = all")->capture_default_str();
  eval->add_flag("--ground-truth", o.ground_truth, "Score ground-truth futures as predictions");
  eval->add_flag("--ablate-scene", o.ablate_scene, "Drop scene and video conditions");
  eval->add_flag("--random-best-of-1", o.random_best_of_1, "Best-of-1 on a raw sample");
  eval->add_flag("--jsonl", o.jsonl, "Per-sample records");

  auto* sweep = app.add_subcommand("sweep-steps", "DDIM/DDPM step grid on one checkpoint");
  add_paths(sweep, false, true, true);
  add_sampling(sweep);
  sweep->add_option("--grid", o.grid, "Pairs like 5+5,10+0 (default grid when empty)");
  sweep->add_option("--k", o.k)->capture_default_str();
  sweep->add_option("--max-samples", o.max_samples, "Held-out decisions (default 16)");

  auto* sim = app.add_subcommand("simulate", "Closed-loop episode");
  add_paths(sim, false, false, true);
  add_sampling(sim);
  add_scene(sim);
  sim->add_option("--duration", o.duration, "Episode length (s)")->capture_default_str();
  sim->add_option("--latency", o.latency, "Simulated latency (s)")->capture_default_str();
  sim->add_option("--latency-jitter", o.latency_jitter)->capture_default_str();
  sim->add_option("--max-empty-cycles", o.max_empty)->capture_default_str();

  auto* report = app.add_subcommand("report", "Summarise an episode log");
  add_paths(report, false, false, false);
  report->add_option("--log", o.log, "episode.jsonl")->required();

  auto* render = app.add_subcommand("render-panorama", "Dump the visual memory of a scene");
  add_paths(render, false, false, false);
  add_scene(render);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::vector<std::pair<CLI::App*, std::function<int(const Options&)>>> commands = {
      {gen_scenes, cmd_gen_scenes}, {gen_corpus, cmd_gen_corpus}, {train_vae_cmd, cmd_train_vae},
      {train_diff, cmd_train_diffusion}, {sample, cmd_sample}, {eval, cmd_eval},
      {sweep, cmd_sweep_steps}, {sim, cmd_simulate}, {report, cmd_report},
      {render, cmd_render_panorama}};
  try {
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(o);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
