#pragma once

#include <cstdint>
#include <vector>

#include <torch/nn.h>

#include "atelier/fusion.hpp"
#include "atelier/text_encoder.hpp"

namespace atelier::t2i {

struct GeneratorOptions {
  std::int64_t noise_dim = 100;
  std::int64_t cond_dim = 256;
  std::int64_t base_channels = 32;
  std::int64_t out_res = 256;  // power of two, >= 8
};

/// Number of resolution stages from 4x4 up to `out_res`.
std::int64_t stage_count(std::int64_t out_res);

/// Residual up-block: two masked affine fusions, each followed by leaky relu
/// and a 3x3 conv; optional 2x nearest upsampling in front.
class GeneratorBlockImpl : public torch::nn::Module {
 public:
  GeneratorBlockImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t cond_dim,
                     bool upsample);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& sentence);

  /// Masks predicted by the most recent forward call.
  const std::vector<torch::Tensor>& last_masks() const { return last_masks_; }

  MaskedAffineFusion fuse1{nullptr}, fuse2{nullptr};
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::Conv2d shortcut{nullptr};

 private:
  bool upsample_;
  std::vector<torch::Tensor> last_masks_;
};
TORCH_MODULE(GeneratorBlock);

class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(GeneratorOptions options);

  /// z: N x noise_dim, sentence: N x cond_dim -> N x 3 x R x R in [-1, 1].
  torch::Tensor forward(const torch::Tensor& z, const torch::Tensor& sentence);

  const GeneratorOptions& options() const { return options_; }
  std::vector<torch::Tensor> last_masks() const;

 private:
  GeneratorOptions options_;
  torch::nn::Linear project{nullptr};
  torch::nn::ModuleList blocks{nullptr};
  torch::nn::Conv2d to_rgb{nullptr};
  std::vector<GeneratorBlock> block_refs_;
};
TORCH_MODULE(Generator);

/// Single-image generation: z is a noise_dim vector. Runs without gradients.
torch::Tensor generate(Generator& generator, const torch::Tensor& z,
                       const textenc::TextEmbedding& embedding);

}  // namespace atelier::t2i
