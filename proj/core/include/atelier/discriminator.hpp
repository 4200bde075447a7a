#pragma once

#include <cstdint>

#include <torch/nn.h>

namespace atelier::t2i {

struct DiscriminatorOptions {
  std::int64_t base_channels = 32;
  std::int64_t cond_dim = 256;
  std::int64_t in_res = 256;
};

/// Residual down-block: 4x4 stride-2 conv + 3x3 conv, with a 1x1 + avg-pool shortcut.
class DownBlockImpl : public torch::nn::Module {
 public:
  DownBlockImpl(std::int64_t in_channels, std::int64_t out_channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv_down{nullptr}, conv{nullptr}, shortcut{nullptr};
};
TORCH_MODULE(DownBlock);

/// Matching-aware discriminator: image features are reduced to 4x4, the
/// sentence vector is tiled spatially and concatenated, and a conditional
/// head produces one unbounded logit per image.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(DiscriminatorOptions options);

  torch::Tensor features(const torch::Tensor& images);
  torch::Tensor score(const torch::Tensor& features, const torch::Tensor& sentence);
  /// images: N x 3 x R x R, sentence: N x cond_dim -> N logits.
  torch::Tensor forward(const torch::Tensor& images, const torch::Tensor& sentence);

  const DiscriminatorOptions& options() const { return options_; }

 private:
  DiscriminatorOptions options_;
  torch::nn::Conv2d stem{nullptr};
  torch::nn::Sequential trunk{nullptr};
  torch::nn::Conv2d joint{nullptr}, head{nullptr};
  std::int64_t feature_channels_ = 0;
};
TORCH_MODULE(Discriminator);

/// Convenience wrapper matching the single-image contract; returns N scores.
torch::Tensor discriminate(Discriminator& d, const torch::Tensor& images, const torch::Tensor& sentence);

}  // namespace atelier::t2i
