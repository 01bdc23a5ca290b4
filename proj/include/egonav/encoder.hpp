#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "egonav/raycast.hpp"
#include "egonav/visual_memory.hpp"

namespace egonav {

inline constexpr int64_t kLatentH = 8;
inline constexpr int64_t kLatentW = 20;
inline constexpr int64_t kLatentC = 8;
inline constexpr int64_t kEmbedDim = 64;
inline constexpr double kDepthScale = 8.0;  // metres mapped to 1.0 in network inputs

/// 5×180×360 network input: RGB, depth/8, semantic intensity.
torch::Tensor panorama_to_tensor(const Panorama& p);
/// 5×H×W network input for one camera frame, same channel scaling.
torch::Tensor frame_to_tensor(const Frame& f);

/// Convolutional MMD autoencoder. encode() returns the deterministic latent
/// B×8×8×20 (channels, height, width); decode() returns B×12×180×360 with
/// channels RGBD followed by 8 semantic logits.
class VaeImpl : public torch::nn::Module {
 public:
  VaeImpl();
  torch::Tensor encode(const torch::Tensor& x);
  torch::Tensor decode(const torch::Tensor& z);

 private:
  torch::nn::Sequential enc_{nullptr};
  torch::nn::Conv2d mu_{nullptr};
  torch::nn::Conv2d d0_{nullptr}, d1_{nullptr}, d2_{nullptr}, d3_{nullptr}, out_{nullptr};
};
TORCH_MODULE(Vae);

/// Horizontal attention pooling, 1D conv along height, vertical attention
/// pooling, then a layer-normalised 64-vector. Input B×C×H×W.
class AttentionAdapterImpl : public torch::nn::Module {
 public:
  AttentionAdapterImpl(int64_t in_channels, int64_t height, int64_t width, int64_t width_dim = 32);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  int64_t dim_;
  torch::nn::Linear proj_{nullptr}, key_h_{nullptr}, key_v_{nullptr}, out_{nullptr};
  torch::nn::Conv1d conv_{nullptr};
  torch::nn::LayerNorm norm_{nullptr};
  torch::Tensor pos_, query_h_, query_v_;
};
TORCH_MODULE(AttentionAdapter);

/// Small convolutional head over the newest frame feeding a mirrored adapter.
class VideoHeadImpl : public torch::nn::Module {
 public:
  VideoHeadImpl();
  /// B×5×60×80 → B×64; exactly zero when zero_mode is set.
  torch::Tensor forward(const torch::Tensor& frame);
  bool zero_mode = false;

 private:
  torch::nn::Sequential conv_{nullptr};
  AttentionAdapter adapter_{nullptr};
};
TORCH_MODULE(VideoHead);

struct VaeTrainConfig {
  int epochs = 12;
  int batch = 8;
  double lr = 2e-3;
  double mmd_weight = 1.0;
  double unobserved_weight = 0.1;  // L1 weight on cells with no observation
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct VaeLosses {
  double total = 0.0;
  double l1_observed = 0.0;  // mean L1 over observed cells, normalised RGBD channels
  double l1_all = 0.0;       // mean L1 over every cell
  double ce = 0.0;
  double mmd = 0.0;
  double semantic_accuracy = 0.0;  // on observed cells
};

struct VaeTrainResult {
  std::vector<VaeLosses> epochs;
  VaeLosses final;
};

/// Trains on N×5×180×360 inputs (any float dtype). Throws DataTooSmall below
/// `min_samples` panoramas.
VaeTrainResult train_vae(Vae& vae, const torch::Tensor& panoramas, const VaeTrainConfig& cfg,
                         std::size_t min_samples = 500);

/// Reconstruction statistics on N×5×180×360 inputs.
VaeLosses evaluate_vae(Vae& vae, const torch::Tensor& panoramas);

/// Latent of one panorama, 8×8×20 (channels, height, width). Throws ShapeMismatch.
torch::Tensor encode_panorama(Vae& vae, const Panorama& p);
torch::Tensor encode_panorama_tensor(Vae& vae, const torch::Tensor& x);

/// Gaussian-kernel maximum mean discrepancy between two sample sets N×D, M×D.
torch::Tensor mmd_loss(const torch::Tensor& a, const torch::Tensor& b);

}  // namespace egonav
