#include "atelier/feature_extractor.hpp"

#include <ATen/CPUGeneratorImpl.h>
#include <torch/script.h>
#include <torch/torch.h>

#include "atelier/error.hpp"

namespace atelier::style {

RandomConvExtractor::RandomConvExtractor(std::uint64_t seed, std::int64_t width)
    : seed_(seed), width_(width) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  const std::int64_t channels[] = {3, width, width * 2, width * 4, width * 4};
  for (int i = 0; i < 4; ++i) {
    const auto in = channels[i], out = channels[i + 1];
    // He-style scale keeps activations from vanishing through the stack.
    const double std = std::sqrt(2.0 / static_cast<double>(in * 9));
    weights_.push_back(at::randn({out, in, 3, 3}, gen, torch::kFloat32) * std);
    biases_.push_back(torch::zeros({out}));
    names_.push_back("relu" + std::to_string(i + 1));
  }
}

std::string RandomConvExtractor::id() const {
  return "random:" + std::to_string(seed_) + "x" + std::to_string(width_);
}

std::vector<torch::Tensor> RandomConvExtractor::extract(const torch::Tensor& images) {
  std::vector<torch::Tensor> out;
  auto h = images;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (i > 0) h = torch::avg_pool2d(h, 2);
    h = torch::relu(torch::conv2d(h, weights_[i], biases_[i], 1, 1));
    out.push_back(h);
  }
  return out;
}

struct TorchScriptExtractor::Impl {
  torch::jit::script::Module module;
};

TorchScriptExtractor::TorchScriptExtractor(const std::filesystem::path& module,
                                           std::size_t content_layer)
    : impl_(std::make_unique<Impl>()), content_(content_layer) {
  try {
    impl_->module = torch::jit::load(module.string());
  } catch (const c10::Error&) {
    throw Error("cannot load style feature extractor " + module.string());
  }
  impl_->module.eval();
  for (auto p : impl_->module.parameters()) p.set_requires_grad(false);
  // Probe once to learn how many layers the module exposes.
  auto probe = extract(torch::zeros({1, 3, 64, 64}));
  for (std::size_t i = 0; i < probe.size(); ++i) names_.push_back("layer" + std::to_string(i));
  if (content_ >= names_.size()) throw Error("content layer index out of range");
  id_ = "torchscript:" + module.filename().string();
}

TorchScriptExtractor::~TorchScriptExtractor() = default;

std::vector<torch::Tensor> TorchScriptExtractor::extract(const torch::Tensor& images) {
  auto result = impl_->module.forward({images});
  std::vector<torch::Tensor> out;
  if (result.isTuple()) {
    for (const auto& v : result.toTuple()->elements()) out.push_back(v.toTensor());
  } else if (result.isTensorList()) {
    for (const auto& t : result.toTensorVector()) out.push_back(t);
  } else {
    out.push_back(result.toTensor());
  }
  return out;
}

std::shared_ptr<FeatureExtractor> make_style_extractor(const std::string& spec) {
  if (spec == "random") return std::make_shared<RandomConvExtractor>();
  if (spec.rfind("random:", 0) == 0) {
    return std::make_shared<RandomConvExtractor>(std::stoull(spec.substr(7)));
  }
  if (spec.rfind("torchscript:", 0) == 0) {
    std::string path = spec.substr(12);
    std::size_t content = 1;
    if (auto hash = path.rfind('#'); hash != std::string::npos) {
      content = std::stoul(path.substr(hash + 1));
      path.resize(hash);
    }
    return std::make_shared<TorchScriptExtractor>(path, content);
  }
  throw Error("unknown style feature extractor: " + spec);
}

}  // namespace atelier::style
