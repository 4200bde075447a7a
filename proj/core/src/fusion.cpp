#include "atelier/fusion.hpp"

#include <torch/torch.h>

#include "atelier/error.hpp"

namespace atelier::t2i {
namespace nn = torch::nn;

torch::Tensor masked_affine_fuse(const torch::Tensor& x_hat, const torch::Tensor& mask,
                                 const torch::Tensor& gamma, const torch::Tensor& beta) {
  if (x_hat.dim() != 4) throw Error("fusion features must be N x C x H x W");
  const auto n = x_hat.size(0), c = x_hat.size(1);
  if (mask.dim() != 4 || mask.size(0) != n || mask.size(1) != 1 || mask.size(2) != x_hat.size(2) ||
      mask.size(3) != x_hat.size(3)) {
    throw Error("mask shape does not match the fused features");
  }
  if (gamma.sizes() != torch::IntArrayRef{n, c} || beta.sizes() != torch::IntArrayRef{n, c}) {
    throw Error("gamma/beta must be N x C");
  }
  const auto affine = gamma.view({n, c, 1, 1}) * x_hat + beta.view({n, c, 1, 1});
  return mask * affine + (1.0 - mask) * x_hat;
}

MaskPredictorImpl::MaskPredictorImpl(std::int64_t channels) {
  const auto mid = std::max<std::int64_t>(1, channels / 2);
  hidden = register_module(
      "hidden", nn::Conv2d(nn::Conv2dOptions(channels, mid, 3).padding(1).bias(false)));
  out = register_module("out", nn::Conv2d(nn::Conv2dOptions(mid, 1, 1)));
  nn::init::zeros_(out->bias);
}

torch::Tensor MaskPredictorImpl::forward(const torch::Tensor& x) {
  return torch::sigmoid(out(torch::leaky_relu(hidden(x), 0.2)));
}

AffineHeadImpl::AffineHeadImpl(std::int64_t cond_dim, std::int64_t channels, double bias_init) {
  fc1 = register_module("fc1", nn::Linear(cond_dim, channels));
  fc2 = register_module("fc2", nn::Linear(channels, channels));
  // Starts as the identity affine (gamma = 1, beta = 0).
  nn::init::zeros_(fc2->weight);
  nn::init::constant_(fc2->bias, bias_init);
}

torch::Tensor AffineHeadImpl::forward(const torch::Tensor& t) { return fc2(torch::relu(fc1(t))); }

MaskedAffineFusionImpl::MaskedAffineFusionImpl(std::int64_t channels, std::int64_t cond_dim)
    : channels_(channels) {
  norm = register_module("norm", nn::BatchNorm2d(nn::BatchNorm2dOptions(channels).affine(false)));
  mask_net = register_module("mask_net", MaskPredictor(channels));
  gamma_net = register_module("gamma_net", AffineHead(cond_dim, channels, 1.0));
  beta_net = register_module("beta_net", AffineHead(cond_dim, channels, 0.0));
}

torch::Tensor MaskedAffineFusionImpl::normalize(const torch::Tensor& x) { return norm(x); }

FusionOutput MaskedAffineFusionImpl::forward(const torch::Tensor& x, const torch::Tensor& sentence) {
  if (x.dim() != 4 || x.size(1) != channels_) throw Error("fusion input has the wrong channel count");
  if (sentence.dim() != 2 || sentence.size(0) != x.size(0)) {
    throw Error("sentence batch does not match the feature batch");
  }
  auto mask = mask_net(x);
  auto fused = masked_affine_fuse(normalize(x), mask, gamma_net(sentence), beta_net(sentence));
  return {fused, mask};
}

}  // namespace atelier::t2i
