#pragma once

// Closed-form reference denoisers and statistics shared by the unit and
// acceptance tests. Everything here is float64.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <torch/torch.h>

#include "egonav/diffusion.hpp"

namespace egonav::testing {

struct GaussianMixture2D {
  std::vector<double> weight;
  std::vector<std::array<double, 2>> mean;
  std::vector<double> stddev;  // isotropic per component
};

/// E[eps | x_t] for data drawn from the mixture, x_t at 1-based step t.
inline torch::Tensor gmm_optimal_eps(const GaussianMixture2D& g, const torch::Tensor& x_t, int t,
                                     const NoiseSchedule& s) {
  const double ab = s.abar(t);
  const torch::Tensor x = x_t.to(torch::kFloat64);
  const int64_t n = x.size(0);
  const auto kc = static_cast<int64_t>(g.weight.size());
  torch::Tensor logp = torch::empty({n, kc}, torch::kFloat64);
  std::vector<torch::Tensor> scores;
  for (int64_t k = 0; k < kc; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double v = ab * g.stddev[ku] * g.stddev[ku] + 1.0 - ab;
    const torch::Tensor mu =
        torch::tensor({g.mean[ku][0], g.mean[ku][1]}, torch::kFloat64).mul(std::sqrt(ab)).unsqueeze(0);
    const torch::Tensor d = x - mu;
    logp.select(1, k).copy_(std::log(g.weight[ku]) - d.pow(2).sum(1) / (2.0 * v) - std::log(v));
    scores.push_back(-d / v);
  }
  const torch::Tensor gamma = logp.softmax(1);
  torch::Tensor score = torch::zeros_like(x);
  for (int64_t k = 0; k < kc; ++k) score += gamma.select(1, k).unsqueeze(1) * scores[static_cast<std::size_t>(k)];
  return (-std::sqrt(1.0 - ab) * score).to(x_t.scalar_type());
}

struct ComponentStats {
  double fraction = 0.0;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 4> cov{0.0, 0.0, 0.0, 0.0};  // row-major 2×2
};

/// Assigns each sample to the component with the highest responsibility at
/// t = 0 and reports per-component weight, mean and covariance.
inline std::vector<ComponentStats> component_stats(const GaussianMixture2D& g, const torch::Tensor& samples) {
  const torch::Tensor x = samples.to(torch::kFloat64);
  const int64_t n = x.size(0);
  const auto kc = static_cast<int64_t>(g.weight.size());
  torch::Tensor logp = torch::empty({n, kc}, torch::kFloat64);
  for (int64_t k = 0; k < kc; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double v = g.stddev[ku] * g.stddev[ku];
    const torch::Tensor mu = torch::tensor({g.mean[ku][0], g.mean[ku][1]}, torch::kFloat64).unsqueeze(0);
    logp.select(1, k).copy_(std::log(g.weight[ku]) - (x - mu).pow(2).sum(1) / (2.0 * v) - std::log(v));
  }
  const torch::Tensor label = logp.argmax(1);
  std::vector<ComponentStats> out(static_cast<std::size_t>(kc));
  for (int64_t k = 0; k < kc; ++k) {
    const torch::Tensor m = x.index({label == k});
    auto& o = out[static_cast<std::size_t>(k)];
    o.fraction = static_cast<double>(m.size(0)) / static_cast<double>(n);
    if (m.size(0) < 2) continue;
    const torch::Tensor mu = m.mean(0);
    const torch::Tensor c = m - mu;
    const torch::Tensor cov = c.t().mm(c) / static_cast<double>(m.size(0) - 1);
    o.mean = {mu[0].item<double>(), mu[1].item<double>()};
    o.cov = {cov[0][0].item<double>(), cov[0][1].item<double>(), cov[1][0].item<double>(),
             cov[1][1].item<double>()};
  }
  return out;
}

/// Central finite-difference check of d(sum(f()·probe))/dθ on `coords` random
/// parameter entries. Returns the worst relative error.
template <typename Fn>
double gradient_check(torch::nn::Module& m, Fn&& f, int coords, std::uint64_t seed, double h = 1e-5) {
  torch::manual_seed(seed);
  std::vector<torch::Tensor> params;
  for (auto& p : m.parameters()) {
    if (p.requires_grad() && p.numel() > 0) params.push_back(p);
  }
  const torch::Tensor y0 = f();
  const torch::Tensor probe = torch::randn_like(y0);
  for (auto& p : params) p.mutable_grad() = torch::Tensor();
  (f() * probe).sum().backward();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0, tries = 0; i < coords && tries < 100 * coords; ++tries) {
    torch::Tensor& p = params[rng() % params.size()];
    const int64_t idx = static_cast<int64_t>(rng() % static_cast<std::uint64_t>(p.numel()));
    const double analytic = p.grad().view(-1)[idx].item<double>();
    double numeric = 0.0;
    {
      torch::NoGradGuard ng;
      torch::Tensor flat = p.view(-1);
      const double orig = flat[idx].item<double>();
      flat[idx] = orig + h;
      const torch::Tensor yp = f();
      const double fp = (yp * probe).sum().item<double>();
      flat[idx] = orig - h;
      const torch::Tensor ym = f();
      const double fm = (ym * probe).sum().item<double>();
      flat[idx] = orig;
      numeric = (fp - fm) / (2.0 * h);
    }
    // Entries with a structurally zero gradient (e.g. biases a softmax
    // cancels) carry no relative information; draw another.
    if (std::abs(analytic) < 1e-8 && std::abs(numeric) < 1e-8) continue;
    ++i;
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace egonav::testing
