#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <torch/nn.h>

namespace atelier::style {

/// Frozen CNN exposing named intermediate activations for perceptual losses.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  /// images: N x 3 x H x W in [-1, 1] -> one activation per layer_names() entry.
  virtual std::vector<torch::Tensor> extract(const torch::Tensor& images) = 0;
  virtual const std::vector<std::string>& layer_names() const = 0;
  /// Index into layer_names() of the content layer.
  virtual std::size_t content_layer() const = 0;
  virtual std::string id() const = 0;
};

/// Four conv stages (relu1..relu4) with fixed random weights drawn from a
/// seeded generator. Stands in for a pretrained classifier when none is
/// configured; deterministic across runs.
class RandomConvExtractor final : public FeatureExtractor {
 public:
  explicit RandomConvExtractor(std::uint64_t seed = 7, std::int64_t width = 16);
  std::vector<torch::Tensor> extract(const torch::Tensor& images) override;
  const std::vector<std::string>& layer_names() const override { return names_; }
  std::size_t content_layer() const override { return 1; }
  std::string id() const override;

 private:
  std::vector<torch::Tensor> weights_;
  std::vector<torch::Tensor> biases_;
  std::vector<std::string> names_;
  std::uint64_t seed_;
  std::int64_t width_;
};

/// TorchScript module whose forward returns a tuple/list of activations.
class TorchScriptExtractor final : public FeatureExtractor {
 public:
  TorchScriptExtractor(const std::filesystem::path& module, std::size_t content_layer);
  ~TorchScriptExtractor() override;
  std::vector<torch::Tensor> extract(const torch::Tensor& images) override;
  const std::vector<std::string>& layer_names() const override { return names_; }
  std::size_t content_layer() const override { return content_; }
  std::string id() const override { return id_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<std::string> names_;
  std::size_t content_;
  std::string id_;
};

/// "random[:seed]" | "torchscript:<path>[#content_layer]".
std::shared_ptr<FeatureExtractor> make_style_extractor(const std::string& spec);

}  // namespace atelier::style
