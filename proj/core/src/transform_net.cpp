#include "atelier/transform_net.hpp"

#include <torch/torch.h>

namespace atelier::style {
namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {

nn::Sequential conv_in_relu(std::int64_t in, std::int64_t out, std::int64_t kernel, std::int64_t stride) {
  return nn::Sequential(
      nn::ReflectionPad2d(kernel / 2),
      nn::Conv2d(nn::Conv2dOptions(in, out, kernel).stride(stride)),
      nn::InstanceNorm2d(nn::InstanceNorm2dOptions(out).affine(true)),
      nn::ReLU());
}

struct ResidualBlockImpl : nn::Module {
  explicit ResidualBlockImpl(std::int64_t ch) {
    body = register_module(
        "body", nn::Sequential(nn::ReflectionPad2d(1), nn::Conv2d(nn::Conv2dOptions(ch, ch, 3)),
                               nn::InstanceNorm2d(nn::InstanceNorm2dOptions(ch).affine(true)),
                               nn::ReLU(), nn::ReflectionPad2d(1),
                               nn::Conv2d(nn::Conv2dOptions(ch, ch, 3)),
                               nn::InstanceNorm2d(nn::InstanceNorm2dOptions(ch).affine(true))));
  }
  torch::Tensor forward(const torch::Tensor& x) { return x + body->forward(x); }
  nn::Sequential body{nullptr};
};
TORCH_MODULE(ResidualBlock);

torch::Tensor upsample_to(const torch::Tensor& x, const torch::Tensor& like) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<std::int64_t>{like.size(2), like.size(3)})
                               .mode(torch::kNearest));
}

}  // namespace

nlohmann::json TransformNetOptions::to_json() const {
  return {{"channels", channels}, {"residual_blocks", residual_blocks}};
}

TransformNetOptions TransformNetOptions::from_json(const nlohmann::json& j) {
  TransformNetOptions o;
  o.channels = j.value("channels", o.channels);
  o.residual_blocks = j.value("residual_blocks", o.residual_blocks);
  return o;
}

TransformNetImpl::TransformNetImpl(TransformNetOptions options) : options_(options) {
  const auto c = options_.channels;
  encoder1 = register_module("encoder1", conv_in_relu(3, c, 9, 1));
  encoder2 = register_module("encoder2", conv_in_relu(c, 2 * c, 3, 2));
  encoder3 = register_module("encoder3", conv_in_relu(2 * c, 4 * c, 3, 2));
  residual = register_module("residual", nn::Sequential());
  for (std::int64_t i = 0; i < options_.residual_blocks; ++i) residual->push_back(ResidualBlock(4 * c));
  decoder1 = register_module("decoder1", conv_in_relu(4 * c, 2 * c, 3, 1));
  decoder2 = register_module("decoder2", conv_in_relu(2 * c, c, 3, 1));
  out = register_module("out", nn::Conv2d(nn::Conv2dOptions(c, 3, 9).padding(4)));
  nn::init::zeros_(out->weight);
  nn::init::zeros_(out->bias);
}

torch::Tensor TransformNetImpl::forward(const torch::Tensor& images) {
  const auto e1 = encoder1->forward(images);
  const auto e2 = encoder2->forward(e1);
  auto h = residual->forward(encoder3->forward(e2));
  h = decoder1->forward(upsample_to(h, e2));
  h = decoder2->forward(upsample_to(h, e1));
  return torch::clamp(images + out(h), -1.0, 1.0);
}

}  // namespace atelier::style
