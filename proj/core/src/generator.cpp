#include "atelier/generator.hpp"

#include <torch/torch.h>

#include "atelier/error.hpp"

namespace atelier::t2i {
namespace nn = torch::nn;
namespace F = torch::nn::functional;

std::int64_t stage_count(std::int64_t out_res) {
  if (out_res < 8 || (out_res & (out_res - 1)) != 0) {
    throw Error("out_res must be a power of two >= 8, got " + std::to_string(out_res));
  }
  std::int64_t n = 1;
  for (std::int64_t r = 4; r < out_res; r *= 2) ++n;
  return n;
}

namespace {
// Channel multiplier of stage i (0 = 4x4): 1 at the output, doubling towards 8 at low res.
std::int64_t stage_multiplier(std::int64_t stage, std::int64_t stages) {
  return std::min<std::int64_t>(8, std::int64_t{1} << (stages - 1 - stage));
}
}  // namespace

GeneratorBlockImpl::GeneratorBlockImpl(std::int64_t in_channels, std::int64_t out_channels,
                                       std::int64_t cond_dim, bool upsample)
    : upsample_(upsample) {
  fuse1 = register_module("fuse1", MaskedAffineFusion(in_channels, cond_dim));
  conv1 = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 3).padding(1)));
  fuse2 = register_module("fuse2", MaskedAffineFusion(out_channels, cond_dim));
  conv2 = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(out_channels, out_channels, 3).padding(1)));
  if (in_channels != out_channels) {
    shortcut = register_module("shortcut", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 1)));
  }
}

torch::Tensor GeneratorBlockImpl::forward(const torch::Tensor& input, const torch::Tensor& sentence) {
  auto x = input;
  if (upsample_) {
    x = F::interpolate(x, F::InterpolateFuncOptions()
                              .scale_factor(std::vector<double>{2.0, 2.0})
                              .mode(torch::kNearest));
  }
  auto f1 = fuse1(x, sentence);
  auto h = conv1(torch::leaky_relu(f1.features, 0.2));
  auto f2 = fuse2(h, sentence);
  h = conv2(torch::leaky_relu(f2.features, 0.2));
  last_masks_ = {f1.mask, f2.mask};
  return (shortcut ? shortcut(x) : x) + h;
}

GeneratorImpl::GeneratorImpl(GeneratorOptions options) : options_(options) {
  const auto stages = stage_count(options_.out_res);
  const auto ngf = options_.base_channels;
  project = register_module("project", nn::Linear(options_.noise_dim, ngf * 8 * 4 * 4));
  blocks = register_module("blocks", nn::ModuleList());
  for (std::int64_t s = 0; s < stages; ++s) {
    const auto in_ch = ngf * (s == 0 ? 8 : stage_multiplier(s - 1, stages));
    const auto out_ch = ngf * stage_multiplier(s, stages);
    GeneratorBlock block(in_ch, out_ch, options_.cond_dim, s > 0);
    blocks->push_back(block);
    block_refs_.push_back(block);
  }
  to_rgb = register_module("to_rgb", nn::Conv2d(nn::Conv2dOptions(ngf, 3, 3).padding(1)));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& z, const torch::Tensor& sentence) {
  if (z.dim() != 2 || z.size(1) != options_.noise_dim) {
    throw Error("noise must be N x " + std::to_string(options_.noise_dim));
  }
  if (sentence.dim() != 2 || sentence.size(1) != options_.cond_dim) {
    throw Error("sentence embedding must be N x " + std::to_string(options_.cond_dim));
  }
  auto x = project(z).view({z.size(0), options_.base_channels * 8, 4, 4});
  for (auto& block : block_refs_) x = block->forward(x, sentence);
  return torch::tanh(to_rgb(torch::leaky_relu(x, 0.2)));
}

std::vector<torch::Tensor> GeneratorImpl::last_masks() const {
  std::vector<torch::Tensor> masks;
  for (const auto& block : block_refs_) {
    for (const auto& m : block->last_masks()) masks.push_back(m);
  }
  return masks;
}

torch::Tensor generate(Generator& generator, const torch::Tensor& z,
                       const textenc::TextEmbedding& embedding) {
  const auto& opts = generator->options();
  if (embedding.sentence_vector.dim() != 1 || embedding.sentence_vector.size(0) != opts.cond_dim) {
    throw Error("text embedding has dimension " +
                std::to_string(embedding.sentence_vector.numel()) + ", generator expects " +
                std::to_string(opts.cond_dim));
  }
  if (z.dim() != 1 || z.size(0) != opts.noise_dim) {
    throw Error("noise vector must have dimension " + std::to_string(opts.noise_dim));
  }
  torch::NoGradGuard no_grad;
  return generator->forward(z.unsqueeze(0), embedding.sentence_vector.unsqueeze(0)).squeeze(0);
}

}  // namespace atelier::t2i
