#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "egonav/encoder.hpp"

namespace egonav {

// Timesteps are 1-based in the samplers: x_t for t in 1..T has signal level
// alpha_bar(t) = alpha_bar[t-1], and alpha_bar(0) = 1 is clean data. q_sample
// and the network take the 0-based array index t-1.
struct NoiseSchedule {
  std::vector<double> beta, alpha, alpha_bar;
  int T() const { return static_cast<int>(beta.size()); }
  double abar(int t) const { return t <= 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)]; }
  double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  double alpha_at(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
};

/// Throws InvalidRange unless 0 < beta1 < betaT < 1 and T >= 2.
NoiseSchedule linear_schedule(int T = 1000, double beta1 = 1e-4, double betaT = 0.02);

/// sqrt(alpha_bar[k])·x0 + sqrt(1 − alpha_bar[k])·eps for array index k in [0, T).
torch::Tensor q_sample(const torch::Tensor& x0, int k, const torch::Tensor& eps, const NoiseSchedule& s);
/// Per-row indices k (B, long) for a batch x0 of B×...
torch::Tensor q_sample(const torch::Tensor& x0, const torch::Tensor& k, const torch::Tensor& eps,
                       const NoiseSchedule& s);

/// DDIM timesteps from T down to n_ddpm, n_ddim + 1 entries, floor-rounded.
std::vector<int> ddim_grid(int T, int n_ddim, int n_ddpm);

/// Deterministic DDIM update from t to t_prev (1-based, t_prev <= t).
torch::Tensor ddim_step(const torch::Tensor& x_t, int t, int t_prev, const torch::Tensor& eps_hat,
                        const NoiseSchedule& s);
/// Ancestral DDPM update from t to t−1; no noise at t = 1.
torch::Tensor ddpm_step(const torch::Tensor& x_t, int t, const torch::Tensor& eps_hat, const NoiseSchedule& s,
                        torch::Generator& gen);
double ddpm_sigma2(int t, const NoiseSchedule& s);

/// eps prediction for a batch x_t at 1-based step t.
using EpsFn = std::function<torch::Tensor(const torch::Tensor& x_t, int t)>;

/// n_ddim DDIM steps on ddim_grid, then n_ddpm consecutive DDPM steps to 0.
/// Starts from standard normal noise of `shape`. Throws InvalidSteps.
torch::Tensor hybrid_sample(const EpsFn& eps, torch::IntArrayRef shape, const NoiseSchedule& s, int n_ddim,
                            int n_ddpm, torch::Generator& gen);

/// Standard normal draw on CPU from an explicit generator.
torch::Tensor randn(torch::IntArrayRef shape, torch::Generator& gen,
                    torch::ScalarType dtype = torch::kFloat32);
torch::Generator make_generator(std::uint64_t seed);

/// Sinusoidal features of (possibly fractional) step indices, B → B×dim.
torch::Tensor timestep_embedding(const torch::Tensor& k, int64_t dim);

class ResBlock1DImpl : public torch::nn::Module {
 public:
  ResBlock1DImpl(int64_t in, int64_t out, int64_t emb);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& emb);

 private:
  torch::nn::GroupNorm n1_{nullptr}, n2_{nullptr};
  torch::nn::Conv1d c1_{nullptr}, c2_{nullptr}, skip_{nullptr};
  torch::nn::Linear e_{nullptr};
};
TORCH_MODULE(ResBlock1D);

class SelfAttention1DImpl : public torch::nn::Module {
 public:
  SelfAttention1DImpl(int64_t channels, int64_t heads);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::GroupNorm norm_{nullptr};
  torch::nn::MultiheadAttention attn_{nullptr};
};
TORCH_MODULE(SelfAttention1D);

/// 1D UNet over B×9×100 with a 100 → 50 → 25 pyramid (width, 2·width,
/// 2·width channels) and self-attention at the bottleneck and the deepest
/// decoder level.
class UNet1DImpl : public torch::nn::Module {
 public:
  explicit UNet1DImpl(int64_t emb_dim = 128, int64_t width = 32);
  /// x: B×9×100, emb: B×emb_dim.
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& emb);

 private:
  torch::nn::Conv1d in_{nullptr}, down0_{nullptr}, down1_{nullptr}, up1_{nullptr}, up0_{nullptr}, out_{nullptr};
  ResBlock1D e0_{nullptr}, e1_{nullptr}, e2_{nullptr}, m0_{nullptr}, m1_{nullptr}, u2_{nullptr}, u1_{nullptr},
      u0_{nullptr};
  SelfAttention1D mid_attn_{nullptr}, up_attn_{nullptr};
  torch::nn::GroupNorm out_norm_{nullptr};
};
TORCH_MODULE(UNet1D);

/// MLP over the flattened normalised past, 900 → 64.
class PastHeadImpl : public torch::nn::Module {
 public:
  PastHeadImpl();
  torch::Tensor forward(const torch::Tensor& past);

 private:
  torch::nn::Sequential mlp_{nullptr};
};
TORCH_MODULE(PastHead);

inline constexpr int64_t kCondDim = 3 * kEmbedDim;
enum CondSlot { kScene = 0, kVideo = 1, kPast = 2 };

/// Model inputs before embedding. latent B×8×8×20, frame B×5×60×80, past B×100×9.
struct CondInputs {
  torch::Tensor latent, frame, past;
};

/// Scene adapter, video head, past head, condition fusion and the UNet.
class NavModelImpl : public torch::nn::Module {
 public:
  explicit NavModelImpl(int64_t emb_dim = 128);
  /// B×192 concatenation [S, F, P].
  torch::Tensor embed(const CondInputs& c);
  /// eps for x_t (B×100×9) at array indices k (B), conditions B×192.
  torch::Tensor eps(const torch::Tensor& x_t, const torch::Tensor& k, const torch::Tensor& cond);

  AttentionAdapter adapter{nullptr};
  VideoHead video{nullptr};
  PastHead past{nullptr};
  torch::nn::Linear fusion{nullptr};
  torch::nn::Sequential time_mlp{nullptr};
  UNet1D unet{nullptr};

 private:
  int64_t emb_dim_;
};
TORCH_MODULE(NavModel);

/// Zeroes the 64-wide slot of every dropped condition. mask: B×3 bool.
torch::Tensor apply_drop(const torch::Tensor& cond, const torch::Tensor& mask);
/// Zeroes the given slots for every row.
torch::Tensor drop_slots(const torch::Tensor& cond, const std::vector<CondSlot>& slots);

struct DropCounters {
  std::int64_t draws = 0;
  std::array<std::int64_t, 3> dropped{0, 0, 0};
  double rate(int slot) const { return draws ? static_cast<double>(dropped[static_cast<std::size_t>(slot)]) / draws : 0.0; }
};
/// Independent Bernoulli(p) drop per row and condition.
torch::Tensor sample_drop_mask(int64_t batch, double p, torch::Generator& gen, DropCounters* counters = nullptr);

struct TrainBatch {
  torch::Tensor x0;  // B×100×9 normalised future
  CondInputs cond;
};

/// One ε-prediction step with per-condition dropout; returns the MSE loss.
double train_step(NavModel& model, torch::optim::Optimizer& opt, const TrainBatch& batch, const NoiseSchedule& s,
                  torch::Generator& gen, double drop_p = 0.1, DropCounters* counters = nullptr);
/// Loss without an update, at the given drop probability.
double diffusion_loss(NavModel& model, const TrainBatch& batch, const NoiseSchedule& s, torch::Generator& gen,
                      double drop_p = 0.0);

/// eps_uncond + w·(eps_cond − eps_uncond) with eps_uncond at all-zero conditions.
torch::Tensor guided_eps(NavModel& model, const torch::Tensor& x_t, int t, const torch::Tensor& cond, double w);

struct SampleOptions {
  int n_ddim = 5;
  int n_ddpm = 5;
  int64_t batch = 64;
  double guidance = 1.5;
};
/// B normalised samples (B×100×9) for one conditioning row (1×192).
torch::Tensor sample_trajectories(NavModel& model, const torch::Tensor& cond, const NoiseSchedule& s,
                                  const SampleOptions& opt, torch::Generator& gen);

struct ThroughputResult {
  int64_t batch = 0;
  int n_ddim = 0, n_ddpm = 0;
  double seconds_per_call = 0.0;
  double trajectories_per_second = 0.0;
};
/// Times `repeats` sampling calls; appends a row to `csv_path` when non-empty.
ThroughputResult sample_throughput_bench(NavModel& model, const NoiseSchedule& s, const SampleOptions& opt,
                                         int repeats = 3, const std::string& csv_path = "");

int64_t parameter_count(const torch::nn::Module& m);

}  // namespace egonav
