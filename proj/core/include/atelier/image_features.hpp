#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <opencv2/core.hpp>

#include "atelier/dataset.hpp"
#include "atelier/fid.hpp"

namespace atelier::eval {

/// Maps an RGB image to a fixed-length feature vector for distribution metrics.
class ImageFeatureExtractor {
 public:
  virtual ~ImageFeatureExtractor() = default;
  virtual Eigen::VectorXd extract(const cv::Mat& rgb) = 0;
  virtual std::string id() const = 0;
};

/// Deterministic extractor: per-channel mean and standard deviation plus the
/// per-channel means of a 2x2 grid (18 dimensions, values in [0, 1]).
class ColorStatsExtractor final : public ImageFeatureExtractor {
 public:
  Eigen::VectorXd extract(const cv::Mat& rgb) override;
  std::string id() const override { return "color-stats"; }
};

/// TorchScript module taking 1x3xSxS in [-1, 1]; its output is flattened.
class TorchScriptFeatureExtractor final : public ImageFeatureExtractor {
 public:
  TorchScriptFeatureExtractor(const std::filesystem::path& module, int input_side);
  ~TorchScriptFeatureExtractor() override;
  Eigen::VectorXd extract(const cv::Mat& rgb) override;
  std::string id() const override { return id_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int side_;
  std::string id_;
};

/// "stub" | "color-stats" | "torchscript:<path>[@<side>]".
std::unique_ptr<ImageFeatureExtractor> make_feature_extractor(const std::string& spec);

FeatureSet extract_features(const dataset::Manifest& manifest, ImageFeatureExtractor& extractor);

}  // namespace atelier::eval
