#include "egonav/diffusion.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "egonav/error.hpp"

namespace egonav {

NoiseSchedule linear_schedule(int T, double beta1, double betaT) {
  if (T < 2 || !(beta1 > 0.0) || !(beta1 < betaT) || !(betaT < 1.0)) {
    throw InvalidRange("linear schedule needs T >= 2 and 0 < beta1 < betaT < 1");
  }
  NoiseSchedule s;
  s.beta.resize(static_cast<std::size_t>(T));
  s.alpha.resize(s.beta.size());
  s.alpha_bar.resize(s.beta.size());
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    const auto k = static_cast<std::size_t>(i);
    s.beta[k] = beta1 + i * (betaT - beta1) / (T - 1);
    s.alpha[k] = 1.0 - s.beta[k];
    prod *= s.alpha[k];
    s.alpha_bar[k] = prod;
  }
  return s;
}

torch::Tensor q_sample(const torch::Tensor& x0, int k, const torch::Tensor& eps, const NoiseSchedule& s) {
  const double ab = s.alpha_bar.at(static_cast<std::size_t>(k));
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

torch::Tensor q_sample(const torch::Tensor& x0, const torch::Tensor& k, const torch::Tensor& eps,
                       const NoiseSchedule& s) {
  const torch::Tensor ab =
      torch::tensor(s.alpha_bar, torch::kFloat64).index_select(0, k.to(torch::kLong)).to(x0.scalar_type());
  std::vector<int64_t> shape(static_cast<std::size_t>(x0.dim()), 1);
  shape[0] = x0.size(0);
  const torch::Tensor a = ab.view(shape);
  return a.sqrt() * x0 + (1.0 - a).sqrt() * eps;
}

std::vector<int> ddim_grid(int T, int n_ddim, int n_ddpm) {
  std::vector<int> g;
  g.reserve(static_cast<std::size_t>(n_ddim) + 1);
  for (int i = 0; i <= n_ddim; ++i) {
    const double v = T + (static_cast<double>(n_ddpm) - T) * i / std::max(1, n_ddim);
    g.push_back(static_cast<int>(std::floor(v + 1e-9)));
  }
  g.back() = n_ddpm;
  return g;
}

torch::Tensor ddim_step(const torch::Tensor& x_t, int t, int t_prev, const torch::Tensor& eps_hat,
                        const NoiseSchedule& s) {
  if (t_prev == t) return x_t;
  const double a = s.abar(t), ap = s.abar(t_prev);
  const torch::Tensor x0 = (x_t - std::sqrt(1.0 - a) * eps_hat) / std::sqrt(a);
  return std::sqrt(ap) * x0 + std::sqrt(1.0 - ap) * eps_hat;
}

double ddpm_sigma2(int t, const NoiseSchedule& s) {
  return s.beta_at(t) * (1.0 - s.abar(t - 1)) / (1.0 - s.abar(t));
}

torch::Tensor ddpm_step(const torch::Tensor& x_t, int t, const torch::Tensor& eps_hat, const NoiseSchedule& s,
                        torch::Generator& gen) {
  const double b = s.beta_at(t);
  torch::Tensor mu = (x_t - (b / std::sqrt(1.0 - s.abar(t))) * eps_hat) / std::sqrt(s.alpha_at(t));
  if (t == 1) return mu;
  return mu + std::sqrt(ddpm_sigma2(t, s)) * randn(x_t.sizes(), gen, x_t.scalar_type());
}

torch::Tensor randn(torch::IntArrayRef shape, torch::Generator& gen, torch::ScalarType dtype) {
  return torch::randn(shape, gen, torch::TensorOptions().dtype(dtype));
}

torch::Generator make_generator(std::uint64_t seed) { return at::detail::createCPUGenerator(seed); }

torch::Tensor hybrid_sample(const EpsFn& eps, torch::IntArrayRef shape, const NoiseSchedule& s, int n_ddim,
                            int n_ddpm, torch::Generator& gen) {
  if (n_ddim < 0 || n_ddpm < 0 || n_ddim + n_ddpm < 1 || n_ddpm > s.T()) {
    throw InvalidSteps("need n_ddim, n_ddpm >= 0, n_ddim + n_ddpm >= 1 and n_ddpm <= T");
  }
  torch::NoGradGuard ng;
  torch::Tensor x = randn(shape, gen);
  if (n_ddim > 0) {
    const std::vector<int> g = ddim_grid(s.T(), n_ddim, n_ddpm);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      if (g[i] == g[i + 1]) continue;
      x = ddim_step(x, g[i], g[i + 1], eps(x, g[i]), s);
    }
  }
  for (int t = n_ddpm; t >= 1; --t) x = ddpm_step(x, t, eps(x, t), s, gen);
  return x;
}

torch::Tensor timestep_embedding(const torch::Tensor& k, int64_t dim) {
  const int64_t half = dim / 2;
  const torch::Tensor freqs =
      torch::exp(-std::log(10000.0) * torch::arange(half, k.options().dtype(torch::kFloat64)) / half)
          .to(k.device());
  const torch::Tensor a = k.to(torch::kFloat64).unsqueeze(1) * freqs.unsqueeze(0);
  return torch::cat({a.sin(), a.cos()}, 1);
}

ResBlock1DImpl::ResBlock1DImpl(int64_t in, int64_t out, int64_t emb) {
  n1_ = register_module("n1", torch::nn::GroupNorm(8, in));
  c1_ = register_module("c1", torch::nn::Conv1d(torch::nn::Conv1dOptions(in, out, 3).padding(1)));
  e_ = register_module("e", torch::nn::Linear(emb, out));
  n2_ = register_module("n2", torch::nn::GroupNorm(8, out));
  c2_ = register_module("c2", torch::nn::Conv1d(torch::nn::Conv1dOptions(out, out, 3).padding(1)));
  if (in != out) skip_ = register_module("skip", torch::nn::Conv1d(torch::nn::Conv1dOptions(in, out, 1)));
}

torch::Tensor ResBlock1DImpl::forward(const torch::Tensor& x, const torch::Tensor& emb) {
  torch::Tensor h = c1_->forward(torch::silu(n1_->forward(x)));
  h = h + e_->forward(torch::silu(emb)).unsqueeze(-1);
  h = c2_->forward(torch::silu(n2_->forward(h)));
  return h + (skip_ ? skip_->forward(x) : x);
}

SelfAttention1DImpl::SelfAttention1DImpl(int64_t channels, int64_t heads) {
  norm_ = register_module("norm", torch::nn::GroupNorm(8, channels));
  attn_ = register_module("attn", torch::nn::MultiheadAttention(torch::nn::MultiheadAttentionOptions(channels, heads)));
}

torch::Tensor SelfAttention1DImpl::forward(const torch::Tensor& x) {
  const torch::Tensor h = norm_->forward(x).permute({2, 0, 1});  // L B C
  const torch::Tensor a = std::get<0>(attn_->forward(h, h, h));
  return x + a.permute({1, 2, 0});
}

UNet1DImpl::UNet1DImpl(int64_t emb, int64_t width) {
  using torch::nn::Conv1d;
  using torch::nn::Conv1dOptions;
  const int64_t c0 = width, c1 = 2 * width;
  in_ = register_module("in", Conv1d(Conv1dOptions(kTrajChannels, c0, 3).padding(1)));
  e0_ = register_module("e0", ResBlock1D(c0, c0, emb));
  down0_ = register_module("down0", Conv1d(Conv1dOptions(c0, c0, 3).stride(2).padding(1)));
  e1_ = register_module("e1", ResBlock1D(c0, c1, emb));
  down1_ = register_module("down1", Conv1d(Conv1dOptions(c1, c1, 3).stride(2).padding(1)));
  e2_ = register_module("e2", ResBlock1D(c1, c1, emb));
  m0_ = register_module("m0", ResBlock1D(c1, c1, emb));
  mid_attn_ = register_module("mid_attn", SelfAttention1D(c1, 4));
  m1_ = register_module("m1", ResBlock1D(c1, c1, emb));
  u2_ = register_module("u2", ResBlock1D(2 * c1, c1, emb));
  up_attn_ = register_module("up_attn", SelfAttention1D(c1, 4));
  up1_ = register_module("up1", Conv1d(Conv1dOptions(c1, c1, 3).padding(1)));
  u1_ = register_module("u1", ResBlock1D(2 * c1, c1, emb));
  up0_ = register_module("up0", Conv1d(Conv1dOptions(c1, c1, 3).padding(1)));
  u0_ = register_module("u0", ResBlock1D(c1 + c0, c0, emb));
  out_norm_ = register_module("out_norm", torch::nn::GroupNorm(8, c0));
  out_ = register_module("out", Conv1d(Conv1dOptions(c0, kTrajChannels, 3).padding(1)));
  torch::NoGradGuard ng;
  out_->weight.zero_();
  out_->bias.zero_();
}

torch::Tensor UNet1DImpl::forward(const torch::Tensor& x, const torch::Tensor& emb) {
  namespace F = torch::nn::functional;
  const auto up = [](const torch::Tensor& t, int64_t len) {
    return F::interpolate(t, F::InterpolateFuncOptions().size(std::vector<int64_t>{len}).mode(torch::kNearest));
  };
  const torch::Tensor h0 = e0_->forward(in_->forward(x), emb);
  const torch::Tensor h1 = e1_->forward(down0_->forward(h0), emb);
  const torch::Tensor h2 = e2_->forward(down1_->forward(h1), emb);
  torch::Tensor h = m1_->forward(mid_attn_->forward(m0_->forward(h2, emb)), emb);
  h = up_attn_->forward(u2_->forward(torch::cat({h, h2}, 1), emb));
  h = u1_->forward(torch::cat({up1_->forward(up(h, h1.size(2))), h1}, 1), emb);
  h = u0_->forward(torch::cat({up0_->forward(up(h, h0.size(2))), h0}, 1), emb);
  return out_->forward(torch::silu(out_norm_->forward(h)));
}

PastHeadImpl::PastHeadImpl() {
  mlp_ = register_module("mlp", torch::nn::Sequential(torch::nn::Linear(kHorizon * kTrajChannels, 256),
                                                      torch::nn::SiLU(), torch::nn::Linear(256, kEmbedDim)));
}

torch::Tensor PastHeadImpl::forward(const torch::Tensor& past) { return mlp_->forward(past.flatten(1)); }

NavModelImpl::NavModelImpl(int64_t emb_dim) : emb_dim_(emb_dim) {
  adapter = register_module("adapter", AttentionAdapter(kLatentC, kLatentH, kLatentW));
  video = register_module("video", VideoHead());
  past = register_module("past", PastHead());
  fusion = register_module("fusion", torch::nn::Linear(kCondDim, emb_dim));
  time_mlp = register_module("time_mlp", torch::nn::Sequential(torch::nn::Linear(emb_dim, emb_dim), torch::nn::SiLU(),
                                                               torch::nn::Linear(emb_dim, emb_dim)));
  unet = register_module("unet", UNet1D(emb_dim));
}

torch::Tensor NavModelImpl::embed(const CondInputs& c) {
  return torch::cat({adapter->forward(c.latent), video->forward(c.frame), past->forward(c.past)}, 1);
}

torch::Tensor NavModelImpl::eps(const torch::Tensor& x_t, const torch::Tensor& k, const torch::Tensor& cond) {
  const torch::Tensor temb = timestep_embedding(k, emb_dim_).to(x_t.scalar_type());
  const torch::Tensor emb = time_mlp->forward(temb) + fusion->forward(cond);
  return unet->forward(x_t.transpose(1, 2), emb).transpose(1, 2);
}

torch::Tensor apply_drop(const torch::Tensor& cond, const torch::Tensor& mask) {
  const torch::Tensor keep = (~mask).to(cond.scalar_type()).repeat_interleave(kEmbedDim, 1);
  return cond * keep;
}

torch::Tensor drop_slots(const torch::Tensor& cond, const std::vector<CondSlot>& slots) {
  torch::Tensor mask = torch::zeros({cond.size(0), 3}, torch::kBool);
  for (CondSlot s : slots) mask.select(1, s).fill_(true);
  return apply_drop(cond, mask);
}

torch::Tensor sample_drop_mask(int64_t batch, double p, torch::Generator& gen, DropCounters* counters) {
  const torch::Tensor mask = torch::rand({batch, 3}, gen) < p;
  if (counters) {
    counters->draws += batch;
    const torch::Tensor per = mask.sum(0);
    for (int i = 0; i < 3; ++i) counters->dropped[static_cast<std::size_t>(i)] += per[i].item<int64_t>();
  }
  return mask;
}

namespace {

torch::Tensor batch_loss(NavModel& model, const TrainBatch& batch, const NoiseSchedule& s, torch::Generator& gen,
                         double drop_p, DropCounters* counters) {
  const int64_t b = batch.x0.size(0);
  const torch::Tensor k = torch::randint(0, s.T(), {b}, gen, torch::kLong);
  const torch::Tensor noise = randn(batch.x0.sizes(), gen, batch.x0.scalar_type());
  const torch::Tensor mask = sample_drop_mask(b, drop_p, gen, counters);
  const torch::Tensor cond = apply_drop(model->embed(batch.cond), mask);
  const torch::Tensor pred = model->eps(q_sample(batch.x0, k, noise, s), k, cond);
  return torch::mse_loss(pred, noise);
}

}  // namespace

double train_step(NavModel& model, torch::optim::Optimizer& opt, const TrainBatch& batch, const NoiseSchedule& s,
                  torch::Generator& gen, double drop_p, DropCounters* counters) {
  model->train();
  const torch::Tensor loss = batch_loss(model, batch, s, gen, drop_p, counters);
  opt.zero_grad();
  loss.backward();
  torch::nn::utils::clip_grad_norm_(model->parameters(), 1.0);
  opt.step();
  return loss.item<double>();
}

double diffusion_loss(NavModel& model, const TrainBatch& batch, const NoiseSchedule& s, torch::Generator& gen,
                      double drop_p) {
  torch::NoGradGuard ng;
  return batch_loss(model, batch, s, gen, drop_p, nullptr).item<double>();
}

torch::Tensor guided_eps(NavModel& model, const torch::Tensor& x_t, int t, const torch::Tensor& cond, double w) {
  const int64_t b = x_t.size(0);
  if (w == 0.0) return model->eps(x_t, torch::full({b}, t - 1, torch::kLong), torch::zeros_like(cond));
  if (w == 1.0) return model->eps(x_t, torch::full({b}, t - 1, torch::kLong), cond);
  const torch::Tensor k = torch::full({2 * b}, t - 1, torch::kLong);
  const torch::Tensor both =
      model->eps(torch::cat({x_t, x_t}, 0), k, torch::cat({cond, torch::zeros_like(cond)}, 0));
  const torch::Tensor ec = both.slice(0, 0, b), eu = both.slice(0, b, 2 * b);
  return eu + w * (ec - eu);
}

torch::Tensor sample_trajectories(NavModel& model, const torch::Tensor& cond, const NoiseSchedule& s,
                                  const SampleOptions& opt, torch::Generator& gen) {
  torch::NoGradGuard ng;
  model->eval();
  const torch::Tensor c = cond.expand({opt.batch, cond.size(1)});
  const EpsFn fn = [&](const torch::Tensor& x, int t) { return guided_eps(model, x, t, c, opt.guidance); };
  return hybrid_sample(fn, {opt.batch, static_cast<int64_t>(kHorizon), static_cast<int64_t>(kTrajChannels)}, s,
                       opt.n_ddim, opt.n_ddpm, gen);
}

ThroughputResult sample_throughput_bench(NavModel& model, const NoiseSchedule& s, const SampleOptions& opt,
                                         int repeats, const std::string& csv_path) {
  torch::Generator gen = make_generator(0);
  const torch::Tensor cond = randn({1, kCondDim}, gen);
  sample_trajectories(model, cond, s, opt, gen);  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) sample_trajectories(model, cond, s, opt, gen);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
  ThroughputResult r{opt.batch, opt.n_ddim, opt.n_ddpm, secs, static_cast<double>(opt.batch) / secs};
  if (!csv_path.empty()) {
    const bool fresh = !std::filesystem::exists(csv_path);
    std::ofstream os(csv_path, std::ios::app);
    if (!os) throw IoFailure("cannot write " + csv_path);
    if (fresh) os << "batch,n_ddim,n_ddpm,seconds_per_call,trajectories_per_second\n";
    os << r.batch << ',' << r.n_ddim << ',' << r.n_ddpm << ',' << r.seconds_per_call << ','
       << r.trajectories_per_second << '\n';
  }
  return r;
}

int64_t parameter_count(const torch::nn::Module& m) {
  int64_t n = 0;
  for (const auto& p : m.parameters()) n += p.numel();
  return n;
}

}  // namespace egonav
