#pragma once

#include <cstdint>

#include <torch/nn.h>

namespace atelier::t2i {

/// out = m * (gamma * x_hat + beta) + (1 - m) * x_hat
///
/// x_hat: N x C x H x W normalized features, mask: N x 1 x H x W in [0, 1]
/// (broadcast over channels), gamma/beta: N x C.
torch::Tensor masked_affine_fuse(const torch::Tensor& x_hat, const torch::Tensor& mask,
                                 const torch::Tensor& gamma, const torch::Tensor& beta);

/// Spatial mask from block features: conv3x3 -> leaky relu -> conv1x1 -> sigmoid.
/// The first conv has no bias, so a zero input with a zero final bias gives 0.5.
class MaskPredictorImpl : public torch::nn::Module {
 public:
  explicit MaskPredictorImpl(std::int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d hidden{nullptr};
  torch::nn::Conv2d out{nullptr};
};
TORCH_MODULE(MaskPredictor);

/// sentence vector -> per-channel scale or shift (two-layer MLP).
class AffineHeadImpl : public torch::nn::Module {
 public:
  AffineHeadImpl(std::int64_t cond_dim, std::int64_t channels, double bias_init);
  torch::Tensor forward(const torch::Tensor& t);

  torch::nn::Linear fc1{nullptr};
  torch::nn::Linear fc2{nullptr};
};
TORCH_MODULE(AffineHead);

struct FusionOutput {
  torch::Tensor features;
  torch::Tensor mask;
};

/// One masked affine fusion layer. The input is batch-normalized without
/// learned parameters so that the text-conditioned gamma/beta own all scale
/// and shift; the mask is predicted from the un-normalized input.
class MaskedAffineFusionImpl : public torch::nn::Module {
 public:
  MaskedAffineFusionImpl(std::int64_t channels, std::int64_t cond_dim);

  FusionOutput forward(const torch::Tensor& x, const torch::Tensor& sentence);
  torch::Tensor normalize(const torch::Tensor& x);

  std::int64_t channels() const { return channels_; }

  torch::nn::BatchNorm2d norm{nullptr};
  MaskPredictor mask_net{nullptr};
  AffineHead gamma_net{nullptr};
  AffineHead beta_net{nullptr};

 private:
  std::int64_t channels_;
};
TORCH_MODULE(MaskedAffineFusion);

}  // namespace atelier::t2i
