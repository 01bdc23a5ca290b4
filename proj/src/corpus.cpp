#include "egonav/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "egonav/error.hpp"
#include "egonav/visual_memory.hpp"

namespace egonav {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::mt19937_64 rng(seq);
  return rng();
}

Pose6D random_start(const SceneSpec& scene, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, scene.spawns.size() - 1);
  const std::size_t i = pick(rng);
  Pose6D pose = scene.spawn_pose(i);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = 0.5 * scene.spawns[i].radius * std::sqrt(u(rng));
  const double a = 2.0 * std::numbers::pi * u(rng);
  pose.position.x() += r * std::cos(a);
  pose.position.y() += r * std::sin(a);
  return pose;
}

Trajectory slice(const Trajectory& t, std::size_t begin, std::size_t n) {
  Trajectory out;
  out.rate_hz = t.rate_hz;
  out.poses.assign(t.poses.begin() + static_cast<std::ptrdiff_t>(begin),
                   t.poses.begin() + static_cast<std::ptrdiff_t>(begin + n));
  return out;
}

void assemble_samples(WalkRecord& rec, const std::vector<std::size_t>& starts, const CorpusConfig& cfg) {
  std::map<std::size_t, std::size_t> where;
  for (std::size_t i = 0; i < rec.frame_steps.size(); ++i) where[rec.frame_steps[i]] = i;
  for (std::size_t s : starts) {
    DemoSample d;
    d.past = slice(rec.trajectory, s, cfg.past_steps);
    d.future = slice(rec.trajectory, s + cfg.past_steps, cfg.future_steps);
    d.scene_index = rec.scene_index;
    d.walk_index = rec.walk_index;
    d.past_start = s;
    for (std::size_t step : keyframe_steps(s + cfg.past_steps - 1, cfg)) {
      d.frames.push_back(rec.frames.at(where.at(step)));
    }
    rec.samples.push_back(std::move(d));
  }
}

void put_f32(std::vector<float>& out, double v) { out.push_back(static_cast<float>(v)); }

}  // namespace

std::vector<std::size_t> window_starts(std::size_t n, std::size_t window, std::size_t stride) {
  std::vector<std::size_t> out;
  if (stride == 0 || n < window) return out;
  for (std::size_t s = 0; s + window <= n; s += stride) out.push_back(s);
  return out;
}

std::vector<std::size_t> keyframe_steps(std::size_t end, const CorpusConfig& cfg) {
  std::vector<std::size_t> steps;
  for (std::size_t j = 0; j < cfg.frames_per_sample; ++j) {
    const std::size_t back = j * cfg.frame_stride;
    if (back > end) break;
    steps.push_back(end - back);
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

WalkRecord extract_walk(const SceneSpec& scene, const Trajectory& walk, const CorpusConfig& cfg,
                        std::size_t max_samples) {
  WalkRecord rec;
  rec.trajectory = walk;
  auto starts = window_starts(walk.size(), cfg.past_steps + cfg.future_steps, cfg.stride);
  if (starts.size() > max_samples) starts.resize(max_samples);
  std::vector<std::size_t> steps;
  for (std::size_t s : starts) {
    const auto k = keyframe_steps(s + cfg.past_steps - 1, cfg);
    steps.insert(steps.end(), k.begin(), k.end());
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  rec.frame_steps = steps;
  for (std::size_t step : steps) {
    Frame f = raycast_frame(scene, walk.poses[step], cfg.camera, static_cast<double>(step) / walk.rate_hz);
    if (cfg.clean_depth) clean_frame(f);
    rec.frames.push_back(std::make_shared<const Frame>(std::move(f)));
  }
  assemble_samples(rec, starts, cfg);
  return rec;
}

void for_each_walk(const std::vector<SceneSpec>& scenes, std::size_t samples_per_scene,
                   std::uint64_t seed, const CorpusConfig& cfg,
                   const std::function<void(WalkRecord&)>& sink) {
  if (samples_per_scene == 0) return;
  std::size_t walk_counter = 0;
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const SceneSpec& scene = scenes[si];
    if (scene.spawns.empty()) throw NoPath("scene " + scene.name + " has no spawn region");
    const std::size_t budget =
        cfg.max_walks_per_scene > 0 ? cfg.max_walks_per_scene : 4 + samples_per_scene / 4;
    std::size_t have = 0;
    for (std::size_t w = 0; w < budget && have < samples_per_scene; ++w) {
      const std::uint64_t walk_seed = derive_seed(seed, si, w);
      std::mt19937_64 rng(walk_seed);
      const Pose6D start = random_start(scene, rng);
      const Trajectory traj = generate_demo_trajectory(scene, start, walk_seed, cfg.walker);
      WalkRecord rec = extract_walk(scene, traj, cfg, samples_per_scene - have);
      if (rec.samples.empty()) continue;
      rec.scene_index = si;
      rec.walk_index = walk_counter++;
      rec.seed = walk_seed;
      for (auto& s : rec.samples) {
        s.scene_index = si;
        s.walk_index = rec.walk_index;
      }
      have += rec.samples.size();
      sink(rec);
    }
  }
}

std::vector<DemoSample> make_corpus(const std::vector<SceneSpec>& scenes, std::size_t samples_per_scene,
                                    std::uint64_t seed, const CorpusConfig& cfg) {
  std::vector<DemoSample> out;
  for_each_walk(scenes, samples_per_scene, seed, cfg, [&](WalkRecord& rec) {
    for (auto& s : rec.samples) out.push_back(std::move(s));
  });
  return out;
}

void write_frames(const std::string& path, const std::vector<std::shared_ptr<const Frame>>& frames) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  std::vector<float> buf;
  for (const auto& fp : frames) {
    const Frame& f = *fp;
    buf.clear();
    put_f32(buf, f.camera.width);
    put_f32(buf, f.camera.height);
    put_f32(buf, f.camera.hfov_deg);
    put_f32(buf, f.camera.vfov_deg);
    put_f32(buf, f.camera.max_range);
    put_f32(buf, f.time);
    for (int i = 0; i < 3; ++i) put_f32(buf, f.pose.position[i]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) put_f32(buf, f.pose.rotation(r, c));
    }
    buf.insert(buf.end(), f.color.begin(), f.color.end());
    buf.insert(buf.end(), f.depth.begin(), f.depth.end());
    for (auto s : f.semantic) put_f32(buf, static_cast<int>(s));
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!os) throw IoFailure("write failed: " + path);
}

std::vector<std::shared_ptr<const Frame>> read_frames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path);
  std::vector<std::shared_ptr<const Frame>> out;
  for (;;) {
    float head[18];
    is.read(reinterpret_cast<char*>(head), sizeof(head));
    if (is.gcount() == 0) break;
    if (!is) throw ParseError("truncated frame header in " + path);
    Frame f;
    f.camera.width = static_cast<int>(head[0]);
    f.camera.height = static_cast<int>(head[1]);
    f.camera.hfov_deg = head[2];
    f.camera.vfov_deg = head[3];
    f.camera.max_range = head[4];
    f.time = head[5];
    f.pose.position = Vec3(head[6], head[7], head[8]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) f.pose.rotation(r, c) = head[9 + 3 * r + c];
    }
    const std::size_t n = static_cast<std::size_t>(f.camera.width) * static_cast<std::size_t>(f.camera.height);
    if (n == 0 || n > (1u << 24)) throw ParseError("bad frame size in " + path);
    f.color.resize(3 * n);
    f.depth.resize(n);
    std::vector<float> sem(n);
    is.read(reinterpret_cast<char*>(f.color.data()), static_cast<std::streamsize>(3 * n * sizeof(float)));
    is.read(reinterpret_cast<char*>(f.depth.data()), static_cast<std::streamsize>(n * sizeof(float)));
    is.read(reinterpret_cast<char*>(sem.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!is) throw ParseError("truncated frame payload in " + path);
    f.semantic.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.semantic[i] = static_cast<SemanticClass>(static_cast<int>(sem[i]));
    out.push_back(std::make_shared<const Frame>(std::move(f)));
  }
  return out;
}

void write_corpus(const std::string& dir, const std::vector<SceneSpec>& scenes,
                  std::size_t samples_per_scene, std::uint64_t seed, const CorpusConfig& cfg) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "egonav-corpus-1";
  manifest["seed"] = seed;
  manifest["samples_per_scene"] = samples_per_scene;
  manifest["past_steps"] = cfg.past_steps;
  manifest["future_steps"] = cfg.future_steps;
  manifest["stride"] = cfg.stride;
  manifest["frames_per_sample"] = cfg.frames_per_sample;
  manifest["frame_stride"] = cfg.frame_stride;
  manifest["camera"] = {{"hfov_deg", cfg.camera.hfov_deg}, {"vfov_deg", cfg.camera.vfov_deg},
                        {"width", cfg.camera.width}, {"height", cfg.camera.height},
                        {"max_range", cfg.camera.max_range}};
  json scene_names = json::array();
  for (const auto& s : scenes) scene_names.push_back(s.name);
  manifest["scenes"] = scene_names;
  json walks = json::array();
  std::size_t total = 0;
  for_each_walk(scenes, samples_per_scene, seed, cfg, [&](WalkRecord& rec) {
    std::ostringstream name;
    name << "walk_" << std::setw(4) << std::setfill('0') << rec.walk_index;
    const fs::path wdir = fs::path(dir) / name.str();
    fs::create_directories(wdir);
    save_trajectory((wdir / "trajectory.txt").string(), pack(rec.trajectory, rec.trajectory.size()));
    write_frames((wdir / "frames.bin").string(), rec.frames);
    json starts = json::array();
    for (const auto& s : rec.samples) starts.push_back(s.past_start);
    walks.push_back({{"dir", name.str()}, {"scene_index", rec.scene_index}, {"seed", rec.seed},
                     {"n_poses", rec.trajectory.size()}, {"frame_steps", rec.frame_steps},
                     {"sample_starts", starts}});
    total += rec.samples.size();
  });
  manifest["walks"] = walks;
  manifest["n_samples"] = total;
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw IoFailure("cannot write corpus manifest in " + dir);
  os << manifest.dump(2) << '\n';
}

void read_corpus(const std::string& dir, const std::function<void(WalkRecord&)>& sink) {
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw IoFailure("no corpus manifest in " + dir);
  json m;
  try {
    m = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(std::string("corpus manifest: ") + e.what());
  }
  CorpusConfig cfg;
  cfg.past_steps = m.at("past_steps");
  cfg.future_steps = m.at("future_steps");
  cfg.stride = m.at("stride");
  cfg.frames_per_sample = m.at("frames_per_sample");
  cfg.frame_stride = m.at("frame_stride");
  std::size_t walk_counter = 0;
  for (const auto& w : m.at("walks")) {
    const fs::path wdir = fs::path(dir) / w.at("dir").get<std::string>();
    WalkRecord rec;
    rec.scene_index = w.at("scene_index");
    rec.seed = w.at("seed");
    const auto t = load_trajectory((wdir / "trajectory.txt").string());
    rec.trajectory = unpack(t, t.rows());
    rec.frame_steps = w.at("frame_steps").get<std::vector<std::size_t>>();
    rec.frames = read_frames((wdir / "frames.bin").string());
    if (rec.frames.size() != rec.frame_steps.size()) throw ParseError("frame count mismatch in " + wdir.string());
    rec.walk_index = walk_counter++;
    assemble_samples(rec, w.at("sample_starts").get<std::vector<std::size_t>>(), cfg);
    for (auto& s : rec.samples) s.scene_index = rec.scene_index;
    sink(rec);
  }
}

}  // namespace egonav
