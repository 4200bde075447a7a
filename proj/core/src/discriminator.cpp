#include "atelier/discriminator.hpp"

#include <torch/torch.h>

#include "atelier/error.hpp"
#include "atelier/generator.hpp"

namespace atelier::t2i {
namespace nn = torch::nn;

DownBlockImpl::DownBlockImpl(std::int64_t in_channels, std::int64_t out_channels) {
  conv_down = register_module(
      "conv_down", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 4).stride(2).padding(1)));
  conv = register_module("conv", nn::Conv2d(nn::Conv2dOptions(out_channels, out_channels, 3).padding(1)));
  shortcut = register_module("shortcut", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 1)));
}

torch::Tensor DownBlockImpl::forward(const torch::Tensor& x) {
  auto h = torch::leaky_relu(conv_down(x), 0.2);
  h = torch::leaky_relu(conv(h), 0.2);
  return torch::avg_pool2d(shortcut(x), 2) + h;
}

DiscriminatorImpl::DiscriminatorImpl(DiscriminatorOptions options) : options_(options) {
  const auto downs = stage_count(options_.in_res) - 1;
  const auto ndf = options_.base_channels;
  stem = register_module("stem", nn::Conv2d(nn::Conv2dOptions(3, ndf, 3).padding(1)));
  trunk = register_module("trunk", nn::Sequential());
  std::int64_t ch = ndf;
  for (std::int64_t i = 0; i < downs; ++i) {
    const auto next = std::min(ndf * 16, ch * 2);
    trunk->push_back(DownBlock(ch, next));
    ch = next;
  }
  feature_channels_ = ch;
  joint = register_module(
      "joint", nn::Conv2d(nn::Conv2dOptions(ch + options_.cond_dim, ndf * 2, 3).padding(1)));
  head = register_module("head", nn::Conv2d(nn::Conv2dOptions(ndf * 2, 1, 4)));
}

torch::Tensor DiscriminatorImpl::features(const torch::Tensor& images) {
  if (images.dim() != 4 || images.size(1) != 3 || images.size(2) != options_.in_res ||
      images.size(3) != options_.in_res) {
    throw Error("discriminator expects N x 3 x " + std::to_string(options_.in_res) + " x " +
                std::to_string(options_.in_res) + " images");
  }
  return trunk->forward(stem(images));
}

torch::Tensor DiscriminatorImpl::score(const torch::Tensor& features, const torch::Tensor& sentence) {
  if (sentence.dim() != 2 || sentence.size(0) != features.size(0) ||
      sentence.size(1) != options_.cond_dim) {
    throw Error("sentence embedding does not match the discriminator batch/conditioning");
  }
  const auto tiled = sentence.view({sentence.size(0), sentence.size(1), 1, 1})
                         .expand({sentence.size(0), sentence.size(1), 4, 4});
  auto h = torch::leaky_relu(joint(torch::cat({features, tiled}, 1)), 0.2);
  return head(h).view({features.size(0)});
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& images, const torch::Tensor& sentence) {
  return score(features(images), sentence);
}

torch::Tensor discriminate(Discriminator& d, const torch::Tensor& images, const torch::Tensor& sentence) {
  if (images.dim() == 3) return d->forward(images.unsqueeze(0), sentence.view({1, -1}));
  return d->forward(images, sentence);
}

}  // namespace atelier::t2i
