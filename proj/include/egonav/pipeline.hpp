#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "egonav/controller.hpp"
#include "egonav/corpus.hpp"
#include "egonav/diffusion.hpp"
#include "egonav/encoder.hpp"
#include "egonav/metrics.hpp"
#include "egonav/visual_memory.hpp"

namespace egonav {

inline constexpr double kStdFloor = 0.05;
inline constexpr double kCloudRange = 8.0;  // m, reprojection range for collision clouds

/// Per-channel affine normalisation of H×9 trajectory tensors.
struct Normalizer {
  std::array<double, kTrajChannels> mean{};
  std::array<double, kTrajChannels> stddev{1, 1, 1, 1, 1, 1, 1, 1, 1};

  /// Statistics over every row of an N×H×9 tensor; std floored at kStdFloor.
  static Normalizer fit(const torch::Tensor& x);
  torch::Tensor apply(const torch::Tensor& x) const;
  torch::Tensor invert(const torch::Tensor& x) const;
};

/// Scenes of every layout kind in rotation; deterministic in `seed`.
std::vector<SceneSpec> make_scene_set(std::size_t n, std::uint64_t seed);

Trajectory tensor_to_trajectory(const torch::Tensor& x);  // H×9, any float dtype
torch::Tensor trajectory_to_tensor(const Trajectory& t);  // H×9 float32

/// True when the walk passes within `radius` of a junction node and its
/// closest approach falls inside the future window of `s`.
bool is_junction_sample(const SceneSpec& scene, const Trajectory& walk, const DemoSample& s, double radius = 1.5);

/// What the agent sees for one decision: the visual memory, its collision
/// cloud, the newest frame and the egocentric past.
struct Observation {
  Panorama panorama;
  LabeledPointCloud cloud;   // anchor frame, static and dynamic classes
  torch::Tensor frame;       // 5×60×80
  Trajectory past;           // egocentric, kHorizon poses
};
Observation observe(const std::vector<std::shared_ptr<const Frame>>& frames, const Pose6D& anchor,
                    const Trajectory& past_world);

/// Training tensors. Trajectories are egocentric and unnormalised.
struct NavDataset {
  torch::Tensor past, future;       // N×100×9 float32
  torch::Tensor frame;              // N×5×60×80 float16
  std::vector<torch::Tensor> panoramas;  // 5×180×360 float16 each, released after encoding
  torch::Tensor latent;             // N×8×8×20 float32
  std::vector<std::size_t> scene_index;
  std::vector<bool> junction;
  std::size_t size() const { return scene_index.size(); }
};

using WalkSource = std::function<void(const std::function<void(WalkRecord&)>&)>;

/// Streams walks into tensors. With `encoder` each panorama is encoded on the
/// fly into `latent`; without it the panoramas are kept for the VAE.
NavDataset collect_dataset(const std::vector<SceneSpec>& scenes, const WalkSource& walks, Vae* encoder = nullptr);
/// Every `stride`-th panorama of the stream, at most `max`, as N×5×180×360 float16.
torch::Tensor collect_panoramas(const WalkSource& walks, std::size_t stride, std::size_t max);

/// Trained model bundle: encoder, denoiser and trajectory statistics.
struct NavCheckpoint {
  Vae vae;
  NavModel model;
  Normalizer past_norm, future_norm;
  NoiseSchedule schedule = linear_schedule();
  nlohmann::json meta = nlohmann::json::object();
};
/// Fresh modules initialised under `seed`.
NavCheckpoint make_checkpoint(std::uint64_t seed = 0);
// <dir>/tensors.bin + manifest.txt (see checkpoint.hpp) and <dir>/meta.json.
void save_checkpoint(const std::string& dir, NavCheckpoint& ckpt);
/// Throws IoFailure when `dir` holds no checkpoint.
NavCheckpoint load_checkpoint(const std::string& dir);

/// Encodes dataset panoramas into `latent` with the frozen VAE.
void encode_dataset(NavCheckpoint& ckpt, NavDataset& data, bool release_panoramas = true);

struct DiffusionTrainConfig {
  int steps = 12000;
  int64_t batch = 64;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double drop_p = 0.1;
  int warmup = 200;
  std::uint64_t seed = 0;
  int log_every = 500;
  bool verbose = false;
};
struct DiffusionTrainLog {
  std::vector<double> loss;  // per step
  DropCounters drops;
  double seconds = 0.0;
};
/// Fits the normalisers and trains adapter, video head and denoiser jointly
/// (VAE frozen). Throws DataTooSmall below `min_samples`.
DiffusionTrainLog train_diffusion(NavCheckpoint& ckpt, const NavDataset& data, const DiffusionTrainConfig& cfg,
                                  std::size_t min_samples = 256);
void write_loss_csv(const std::string& path, const std::vector<double>& loss, int every = 1);

struct TrainRecipe {
  std::size_t scenes = 40;
  std::size_t samples_per_scene = 60;
  std::size_t vae_samples = 1000;  // panoramas the VAE sees
  VaeTrainConfig vae;
  DiffusionTrainConfig diffusion;
  CorpusConfig corpus;
  std::size_t min_vae_samples = 500;
  std::size_t min_diffusion_samples = 256;
  std::uint64_t seed = 0;
  bool verbose = false;
};
struct TrainSummary {
  std::size_t samples = 0, junction_samples = 0;
  VaeTrainResult vae;
  DiffusionTrainLog diffusion;
  double corpus_seconds = 0.0, vae_seconds = 0.0;
};
/// Corpus generation, VAE training, latent encoding and diffusion training on
/// make_scene_set(recipe.scenes, recipe.seed).
NavCheckpoint train_pipeline(const TrainRecipe& recipe, TrainSummary* summary = nullptr);
nlohmann::json recipe_to_json(const TrainRecipe& r);

/// 1×192 condition row; `ablate_scene` zeroes S and F.
torch::Tensor condition_row(NavCheckpoint& ckpt, const torch::Tensor& latent, const torch::Tensor& frame,
                            const Trajectory& past_ego, bool ablate_scene = false);
/// Egocentric candidate trajectories.
std::vector<Trajectory> sample_candidates(NavCheckpoint& ckpt, const torch::Tensor& cond, const SampleOptions& opt,
                                          torch::Generator& gen);

/// Pre-encoded held-out decision point.
struct EvalSample {
  torch::Tensor latent;  // 8×8×20
  torch::Tensor frame;   // 5×60×80
  Trajectory past, future;  // egocentric
  LabeledPointCloud cloud;
  bool junction = false;
  std::size_t scene_index = 0;
};
/// Without a checkpoint the latent is left undefined (ground-truth scoring only).
std::vector<EvalSample> prepare_eval_samples(NavCheckpoint* ckpt, const std::vector<SceneSpec>& scenes,
                                             const WalkSource& walks, std::size_t max_samples = 0);

struct EvalOptions {
  SampleOptions sample;
  ControllerConfig controller;
  std::size_t k = 15;
  bool random_best_of_1 = false;  // first raw sample instead of the controller's choice
  bool ablate_scene = false;
  std::uint64_t seed = 0;
  std::string jsonl_path;  // per-sample records when non-empty
};

struct SampleMetrics {
  double collision_selected = 0.0;  // ×100
  double collision_raw = 0.0;       // mean over all candidates, ×100
  double smoothness_selected = 0.0;
  double smoothness_raw = 0.0;
  double best_of_1 = 0.0;
  double best_of_k = 0.0;
  double best_of_16 = 0.0;
  std::size_t survivors = 0;
  bool fallback = false;  // nothing survived filtering, selection ran on all candidates
  bool junction = false;
};

struct EvalResult {
  EvalReport report;           // selected-trajectory collision and smoothness
  double collision_raw = 0.0;  // mean over raw candidates ×100
  double smoothness_raw = 0.0;
  std::size_t fallbacks = 0;
  std::vector<SampleMetrics> samples;
  /// Means over samples matching `junction_only`.
  double mean_best_of_1(bool junction_only) const;
  double mean_best_of_16(bool junction_only) const;
  std::size_t junction_count() const;
};

/// Table-1 protocol over pre-encoded samples. Deterministic in opt.seed.
EvalResult evaluate_samples(NavCheckpoint& ckpt, const std::vector<EvalSample>& samples, const EvalOptions& opt);
/// Scores ground-truth futures as predictions (the self-evaluation row).
EvalReport evaluate_ground_truth(const std::vector<EvalSample>& samples, std::size_t k = 15);

struct SweepRow {
  int n_ddim = 0, n_ddpm = 0;
  double collision = 0.0;   // mean raw-sample score ×100
  double smoothness = 0.0;  // mean raw-sample smoothness
  double best_of_k = 0.0;
};
/// Grid used by the step sweep: full-step references, the pure and mixed
/// 10-step splits and short mixtures. Never contains (0, 0).
std::vector<std::pair<int, int>> default_sweep_grid();
/// Evaluates every grid entry on the same checkpoint. Throws InvalidGrid on an
/// empty grid or negative steps; (0, 0) entries are skipped.
std::vector<SweepRow> sweep_steps(NavCheckpoint& ckpt, const std::vector<EvalSample>& samples,
                                  const std::vector<std::pair<int, int>>& grid, int64_t batch, double guidance,
                                  std::size_t k, std::uint64_t seed,
                                  const std::function<void(const SweepRow&)>& progress = {});
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& r);

}  // namespace egonav
