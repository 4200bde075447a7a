#include "atelier/image_features.hpp"

#include <torch/script.h>
#include <torch/torch.h>

#include "atelier/error.hpp"
#include "atelier/image_io.hpp"

namespace atelier::eval {

Eigen::VectorXd ColorStatsExtractor::extract(const cv::Mat& rgb) {
  if (rgb.empty() || rgb.type() != CV_8UC3) throw Error("feature extraction expects RGB");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(18);
  cv::Scalar mean, stddev;
  cv::meanStdDev(rgb, mean, stddev);
  for (int c = 0; c < 3; ++c) {
    f[c] = mean[c] / 255.0;
    f[3 + c] = stddev[c] / 255.0;
  }
  int k = 6;
  for (int gy = 0; gy < 2; ++gy) {
    for (int gx = 0; gx < 2; ++gx) {
      const int x0 = gx * rgb.cols / 2, y0 = gy * rgb.rows / 2;
      const int x1 = std::max(x0 + 1, (gx + 1) * rgb.cols / 2);
      const int y1 = std::max(y0 + 1, (gy + 1) * rgb.rows / 2);
      const cv::Scalar m = cv::mean(rgb(cv::Rect(x0, y0, x1 - x0, y1 - y0)));
      for (int c = 0; c < 3; ++c) f[k++] = m[c] / 255.0;
    }
  }
  return f;
}

struct TorchScriptFeatureExtractor::Impl {
  torch::jit::script::Module module;
};

TorchScriptFeatureExtractor::TorchScriptFeatureExtractor(const std::filesystem::path& module,
                                                         int input_side)
    : impl_(std::make_unique<Impl>()), side_(input_side) {
  try {
    impl_->module = torch::jit::load(module.string());
  } catch (const c10::Error& e) {
    throw Error("cannot load feature extractor " + module.string());
  }
  impl_->module.eval();
  id_ = "torchscript:" + module.filename().string() + "@" + std::to_string(side_);
}

TorchScriptFeatureExtractor::~TorchScriptFeatureExtractor() = default;

Eigen::VectorXd TorchScriptFeatureExtractor::extract(const cv::Mat& rgb) {
  torch::NoGradGuard guard;
  auto input = image::to_tensor(rgb, side_).unsqueeze(0);
  auto out = impl_->module.forward({input}).toTensor().to(torch::kFloat64).flatten().contiguous();
  return Eigen::Map<const Eigen::VectorXd>(out.data_ptr<double>(), out.numel());
}

std::unique_ptr<ImageFeatureExtractor> make_feature_extractor(const std::string& spec) {
  if (spec == "stub" || spec == "color-stats") return std::make_unique<ColorStatsExtractor>();
  const std::string prefix = "torchscript:";
  if (spec.rfind(prefix, 0) == 0) {
    std::string rest = spec.substr(prefix.size());
    int side = 299;
    if (auto at = rest.rfind('@'); at != std::string::npos) {
      side = std::stoi(rest.substr(at + 1));
      rest.resize(at);
    }
    return std::make_unique<TorchScriptFeatureExtractor>(rest, side);
  }
  throw Error("unknown feature extractor: " + spec);
}

FeatureSet extract_features(const dataset::Manifest& manifest, ImageFeatureExtractor& extractor) {
  Eigen::MatrixXd rows;
  Eigen::Index i = 0;
  for (const auto& r : manifest.records()) {
    const Eigen::VectorXd f = extractor.extract(image::load_rgb(manifest.resolve(r)));
    if (i == 0) rows.resize(static_cast<Eigen::Index>(manifest.size()), f.size());
    if (f.size() != rows.cols()) throw Error("extractor returned inconsistent dimensions");
    rows.row(i++) = f.transpose();
  }
  return FeatureSet(std::move(rows), extractor.id());
}

}  // namespace atelier::eval
