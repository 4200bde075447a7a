#pragma once

#include <cstdint>

#include <torch/nn.h>

namespace atelier::t2i {

struct DamsmOptions {
  double gamma1 = 4.0;   // attention sharpness over regions
  double gamma2 = 5.0;   // word-score aggregation
  double gamma3 = 10.0;  // candidate softmax temperature
};

/// Default region-feature adapter: a small trainable CNN that maps images to a
/// 4x4 grid of region features projected to the word dimension.
class RegionEncoderImpl : public torch::nn::Module {
 public:
  RegionEncoderImpl(std::int64_t embed_dim, std::int64_t in_res, std::int64_t base_channels = 16);
  /// images N x 3 x R x R -> N x D x 16.
  torch::Tensor forward(const torch::Tensor& images);

 private:
  torch::nn::Sequential trunk{nullptr};
  torch::nn::Conv2d project{nullptr};
};
TORCH_MODULE(RegionEncoder);

/// Attention-pooled word/region similarity S(i, j) of image i and caption j.
///
/// regions: B x D x R, words: B x T x D, lengths: B. Word-region attention is
/// normalized over words, sharpened by gamma1 and softmaxed over regions;
/// each word is compared (cosine) to its attended region context and the
/// per-word scores are pooled with log-sum-exp at gamma2.
torch::Tensor damsm_scores(const torch::Tensor& regions, const torch::Tensor& words,
                           const torch::Tensor& lengths, const DamsmOptions& options = {});

/// Symmetric matching loss: mean over both directions of the negative
/// log-likelihood of the true pairing under a gamma3 softmax over batch
/// candidates. Zero for a batch of one.
torch::Tensor damsm_loss(const torch::Tensor& regions, const torch::Tensor& words,
                         const torch::Tensor& lengths, const DamsmOptions& options = {});

}  // namespace atelier::t2i
