#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>
#include <torch/nn.h>

namespace atelier::style {

struct TransformNetOptions {
  std::int64_t channels = 32;
  std::int64_t residual_blocks = 5;

  nlohmann::json to_json() const;
  static TransformNetOptions from_json(const nlohmann::json& j);
};

/// Feed-forward stylization network: reflection-padded conv encoder with two
/// stride-2 downsamplings, residual blocks, nearest-upsampling decoder, all
/// with instance norm. The decoder predicts a residual on top of the input
/// (zero-initialized), so an untrained network is the identity. Output is
/// clamped to [-1, 1].
class TransformNetImpl : public torch::nn::Module {
 public:
  explicit TransformNetImpl(TransformNetOptions options = {});
  torch::Tensor forward(const torch::Tensor& images);
  const TransformNetOptions& options() const { return options_; }

 private:
  TransformNetOptions options_;
  torch::nn::Sequential encoder1{nullptr}, encoder2{nullptr}, encoder3{nullptr};
  torch::nn::Sequential residual{nullptr};
  torch::nn::Sequential decoder1{nullptr}, decoder2{nullptr};
  torch::nn::Conv2d out{nullptr};
};
TORCH_MODULE(TransformNet);

}  // namespace atelier::style
