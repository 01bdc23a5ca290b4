#include "egonav/encoder.hpp"

#include <cmath>
#include <iostream>

#include "egonav/error.hpp"

namespace egonav {

namespace F = torch::nn::functional;
using torch::nn::Conv2d;
using torch::nn::Conv2dOptions;

torch::Tensor panorama_to_tensor(const Panorama& p) {
  torch::Tensor t = torch::from_blob(const_cast<float*>(p.data.data()), {kPanoChannels, kPanoRows, kPanoCols},
                                     torch::kFloat32)
                        .clone();
  t[3].div_(kDepthScale);
  return t;
}

torch::Tensor frame_to_tensor(const Frame& f) {
  const int64_t h = f.camera.height, w = f.camera.width;
  torch::Tensor t = torch::empty({5, h, w}, torch::kFloat32);
  auto a = t.accessor<float, 3>();
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      const std::size_t i = f.index(static_cast<int>(r), static_cast<int>(c));
      for (int k = 0; k < 3; ++k) a[k][r][c] = f.color[3 * i + static_cast<std::size_t>(k)];
      a[3][r][c] = static_cast<float>(f.depth[i] / kDepthScale);
      a[4][r][c] = encode_class(f.semantic[i]);
    }
  }
  return t;
}

VaeImpl::VaeImpl() {
  enc_ = register_module(
      "enc", torch::nn::Sequential(Conv2d(Conv2dOptions(5, 16, 3).stride(2).padding(1)), torch::nn::SiLU(),
                                   Conv2d(Conv2dOptions(16, 32, 3).stride(2).padding(1)), torch::nn::SiLU(),
                                   Conv2d(Conv2dOptions(32, 32, 3).stride(2).padding(1)), torch::nn::SiLU(),
                                   Conv2d(Conv2dOptions(32, 32, 3).stride(2).padding(1)), torch::nn::SiLU(),
                                   torch::nn::AdaptiveAvgPool2d(torch::nn::AdaptiveAvgPool2dOptions({kLatentH, kLatentW}))));
  mu_ = register_module("mu", Conv2d(Conv2dOptions(32, kLatentC, 1)));
  d0_ = register_module("d0", Conv2d(Conv2dOptions(kLatentC, 32, 3).padding(1)));
  d1_ = register_module("d1", Conv2d(Conv2dOptions(32, 32, 3).padding(1)));
  d2_ = register_module("d2", Conv2d(Conv2dOptions(32, 32, 3).padding(1)));
  d3_ = register_module("d3", Conv2d(Conv2dOptions(32, 16, 3).padding(1)));
  out_ = register_module("out", Conv2d(Conv2dOptions(16, 4 + kNumClasses, 3).padding(1)));
}

torch::Tensor VaeImpl::encode(const torch::Tensor& x) { return mu_->forward(enc_->forward(x)); }

torch::Tensor VaeImpl::decode(const torch::Tensor& z) {
  const auto up = [](const torch::Tensor& t, int64_t h, int64_t w) {
    return F::interpolate(t, F::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{h, w})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
  };
  torch::Tensor h = torch::silu(d0_->forward(z));
  h = torch::silu(d1_->forward(up(h, 23, 45)));
  h = torch::silu(d2_->forward(up(h, 45, 90)));
  h = torch::silu(d3_->forward(up(h, 90, 180)));
  return up(out_->forward(h), kPanoRows, kPanoCols);
}

AttentionAdapterImpl::AttentionAdapterImpl(int64_t in_channels, int64_t height, int64_t width, int64_t width_dim)
    : dim_(width_dim) {
  proj_ = register_module("proj", torch::nn::Linear(in_channels, dim_));
  key_h_ = register_module("key_h", torch::nn::Linear(dim_, dim_));
  key_v_ = register_module("key_v", torch::nn::Linear(dim_, dim_));
  conv_ = register_module("conv", torch::nn::Conv1d(torch::nn::Conv1dOptions(dim_, dim_, 3).padding(1)));
  out_ = register_module("out", torch::nn::Linear(dim_, kEmbedDim));
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({kEmbedDim})));
  pos_ = register_parameter("pos", 0.1 * torch::randn({height, width, dim_}));
  query_h_ = register_parameter("query_h", 0.1 * torch::randn({height, dim_}));
  query_v_ = register_parameter("query_v", 0.1 * torch::randn({dim_}));
}

torch::Tensor AttentionAdapterImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(2) != pos_.size(0) || x.size(3) != pos_.size(1)) {
    throw ShapeMismatch("adapter input must be B×C×" + std::to_string(pos_.size(0)) + "×" +
                        std::to_string(pos_.size(1)));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  const torch::Tensor h = proj_->forward(x.permute({0, 2, 3, 1})) + pos_;           // B H W d
  const torch::Tensor ah = ((key_h_->forward(h) * query_h_.unsqueeze(1)).sum(-1) * scale).softmax(2);  // B H W
  torch::Tensor rows = (ah.unsqueeze(-1) * h).sum(2);                                  // B H d
  rows = torch::silu(conv_->forward(rows.transpose(1, 2))).transpose(1, 2);            // B H d
  const torch::Tensor av = ((key_v_->forward(rows) * query_v_).sum(-1) * scale).softmax(1);  // B H
  const torch::Tensor pooled = (av.unsqueeze(-1) * rows).sum(1);                      // B d
  return norm_->forward(out_->forward(pooled));
}

VideoHeadImpl::VideoHeadImpl() {
  conv_ = register_module(
      "conv", torch::nn::Sequential(Conv2d(Conv2dOptions(5, 16, 3).stride(2).padding(1)), torch::nn::SiLU(),
                                    Conv2d(Conv2dOptions(16, 32, 3).stride(2).padding(1)), torch::nn::SiLU(),
                                    Conv2d(Conv2dOptions(32, 8, 3).padding(1))));
  adapter_ = register_module("adapter", AttentionAdapter(8, 15, 20));
}

torch::Tensor VideoHeadImpl::forward(const torch::Tensor& frame) {
  if (zero_mode) return torch::zeros({frame.size(0), kEmbedDim}, frame.options());
  return adapter_->forward(conv_->forward(frame));
}

torch::Tensor mmd_loss(const torch::Tensor& a, const torch::Tensor& b) {
  const double dim = static_cast<double>(a.size(1));
  const auto kernel = [dim](const torch::Tensor& x, const torch::Tensor& y) {
    return torch::exp(-torch::cdist(x, y).pow(2) / dim).mean();
  };
  return kernel(a, a) + kernel(b, b) - 2.0 * kernel(a, b);
}

namespace {

struct BatchLoss {
  torch::Tensor total;
  double l1_observed_sum = 0.0, observed_cells = 0.0, l1_all_sum = 0.0, all_cells = 0.0;
  double ce = 0.0, mmd = 0.0, correct = 0.0;
};

BatchLoss vae_batch_loss(Vae& vae, const torch::Tensor& x, const VaeTrainConfig& cfg, bool train) {
  const torch::Tensor z = vae->encode(x);
  BatchLoss out;
  torch::Tensor mmd = torch::zeros({}, x.options());
  if (train) {
    const torch::Tensor cells = z.permute({0, 2, 3, 1}).reshape({-1, kLatentC});
    const int64_t n = std::min<int64_t>(256, cells.size(0));
    const torch::Tensor pick = cells.index_select(0, torch::randperm(cells.size(0), torch::kLong).slice(0, 0, n));
    mmd = mmd_loss(pick, torch::randn_like(pick));
  }
  const torch::Tensor y = vae->decode(z);
  const torch::Tensor observed = (x.select(1, 3) > 0).to(x.dtype()).unsqueeze(1);  // B 1 H W
  const torch::Tensor err = (y.slice(1, 0, 4) - x.slice(1, 0, 4)).abs();
  const torch::Tensor w = observed + cfg.unobserved_weight * (1.0 - observed);
  const torch::Tensor l1 = (err * w).sum() / (w.sum() * 4.0 + 1e-8);
  const torch::Tensor target = (x.select(1, 4) * kNumClasses).floor().clamp(0, kNumClasses - 1).to(torch::kLong);
  const torch::Tensor logits = y.slice(1, 4, 4 + kNumClasses);
  const torch::Tensor ce = F::cross_entropy(logits, target);
  out.total = l1 + ce + cfg.mmd_weight * mmd;
  torch::NoGradGuard ng;
  out.l1_observed_sum = (err * observed).sum().item<double>();
  out.observed_cells = observed.sum().item<double>() * 4.0;
  out.l1_all_sum = err.sum().item<double>();
  out.all_cells = static_cast<double>(err.numel());
  out.ce = ce.item<double>();
  out.mmd = mmd.item<double>();
  out.correct = ((logits.argmax(1) == target).to(x.dtype()) * observed.squeeze(1)).sum().item<double>();
  return out;
}

VaeLosses finish(double l1o, double no, double l1a, double na, double ce, double mmd, double correct,
                 double batches) {
  VaeLosses r;
  r.l1_observed = no > 0 ? l1o / no : 0.0;
  r.l1_all = na > 0 ? l1a / na : 0.0;
  r.ce = ce / std::max(1.0, batches);
  r.mmd = mmd / std::max(1.0, batches);
  r.semantic_accuracy = no > 0 ? correct / (no / 4.0) : 1.0;
  r.total = r.l1_all + r.ce + r.mmd;
  return r;
}

}  // namespace

VaeTrainResult train_vae(Vae& vae, const torch::Tensor& panoramas, const VaeTrainConfig& cfg,
                         std::size_t min_samples) {
  const int64_t n = panoramas.size(0);
  if (static_cast<std::size_t>(n) < min_samples) {
    throw DataTooSmall("VAE training needs at least " + std::to_string(min_samples) + " panoramas, got " +
                       std::to_string(n));
  }
  torch::manual_seed(cfg.seed);
  vae->train();
  torch::optim::Adam opt(vae->parameters(), torch::optim::AdamOptions(cfg.lr));
  VaeTrainResult res;
  const int64_t steps_per_epoch = (n + cfg.batch - 1) / cfg.batch;
  const int64_t total_steps = steps_per_epoch * cfg.epochs;
  int64_t step = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    const torch::Tensor perm = torch::randperm(n, torch::kLong);
    double l1o = 0, no = 0, l1a = 0, na = 0, ce = 0, mmd = 0, correct = 0, batches = 0;
    for (int64_t s = 0; s < n; s += cfg.batch) {
      const double lr = cfg.lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / total_steps));
      for (auto& g : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr);
      const torch::Tensor idx = perm.slice(0, s, std::min(n, s + cfg.batch));
      const torch::Tensor x = panoramas.index_select(0, idx).to(torch::kFloat32);
      BatchLoss b = vae_batch_loss(vae, x, cfg, true);
      opt.zero_grad();
      b.total.backward();
      opt.step();
      l1o += b.l1_observed_sum;
      no += b.observed_cells;
      l1a += b.l1_all_sum;
      na += b.all_cells;
      ce += b.ce;
      mmd += b.mmd;
      correct += b.correct;
      batches += 1;
      ++step;
    }
    res.epochs.push_back(finish(l1o, no, l1a, na, ce, mmd, correct, batches));
    if (cfg.verbose) {
      const auto& l = res.epochs.back();
      std::cerr << "vae epoch " << e << " l1_obs " << l.l1_observed << " ce " << l.ce << " mmd " << l.mmd
                << " acc " << l.semantic_accuracy << '\n';
    }
  }
  vae->eval();
  res.final = res.epochs.empty() ? VaeLosses{} : res.epochs.back();
  return res;
}

VaeLosses evaluate_vae(Vae& vae, const torch::Tensor& panoramas) {
  torch::NoGradGuard ng;
  vae->eval();
  VaeTrainConfig cfg;
  double l1o = 0, no = 0, l1a = 0, na = 0, ce = 0, mmd = 0, correct = 0, batches = 0;
  for (int64_t s = 0; s < panoramas.size(0); s += 8) {
    const torch::Tensor x = panoramas.slice(0, s, std::min(panoramas.size(0), s + 8)).to(torch::kFloat32);
    BatchLoss b = vae_batch_loss(vae, x, cfg, false);
    l1o += b.l1_observed_sum;
    no += b.observed_cells;
    l1a += b.l1_all_sum;
    na += b.all_cells;
    ce += b.ce;
    correct += b.correct;
    batches += 1;
  }
  return finish(l1o, no, l1a, na, ce, mmd, correct, batches);
}

torch::Tensor encode_panorama_tensor(Vae& vae, const torch::Tensor& x) {
  if (x.dim() != 3 || x.size(0) != kPanoChannels || x.size(1) != kPanoRows || x.size(2) != kPanoCols) {
    throw ShapeMismatch("panorama tensor must be 5×180×360");
  }
  torch::NoGradGuard ng;
  return vae->encode(x.unsqueeze(0).to(torch::kFloat32)).squeeze(0);
}

torch::Tensor encode_panorama(Vae& vae, const Panorama& p) {
  return encode_panorama_tensor(vae, panorama_to_tensor(p));
}

}  // namespace egonav
