#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "atelier/color_histogram.hpp"
#include "atelier/dataset.hpp"
#include "atelier/feature_extractor.hpp"
#include "atelier/perceptual.hpp"
#include "atelier/transform_net.hpp"

namespace atelier::style {

struct StyleTrainConfig {
  std::int64_t steps = 2000;
  std::int64_t batch_size = 4;
  std::int64_t image_size = 256;
  double lr = 1e-3;
  PerceptualWeights weights;
  TransformNetOptions net;
  std::uint64_t seed = 0;
  std::string extractor = "random";
  int bins_per_channel = styleselect::kDefaultBinsPerChannel;
  // Abort when the loss stays above factor x its first value for window steps.
  std::int64_t divergence_window = 100;
  double divergence_factor = 10.0;

  /// 64x64 crops, narrow network, 200 steps.
  static StyleTrainConfig toy();

  nlohmann::json to_json() const;
  static StyleTrainConfig from_json(const nlohmann::json& j, StyleTrainConfig base);
  static StyleTrainConfig from_json(const nlohmann::json& j) { return from_json(j, StyleTrainConfig()); }
};

/// One trained transform network with its style baked in.
struct StyleModel {
  std::string style_id;
  TransformNet net{nullptr};
  nlohmann::json config;
};

/// content: N x 3 x S x S in [-1, 1]; style_image: 3 x H x W in [-1, 1].
StyleModel train_style_model(const std::string& style_id, const torch::Tensor& style_image,
                             const torch::Tensor& content, const StyleTrainConfig& config,
                             FeatureExtractor& extractor);

StyleModel train_style_model(const std::filesystem::path& style_image,
                             const dataset::Manifest& content_manifest,
                             const StyleTrainConfig& config, FeatureExtractor& extractor);

/// Loads every manifest image at side x side as a float batch.
torch::Tensor load_content_batch(const dataset::Manifest& manifest, std::int64_t side);

/// image: 3 x H x W (H, W >= 32) -> same shape. Single forward pass, no grad.
torch::Tensor stylize(const torch::Tensor& image, const StyleModel& model);
cv::Mat stylize(const cv::Mat& rgb, const StyleModel& model);

struct StyleBankEntry {
  std::string style_id;
  styleselect::ColorHistogram histogram;
  std::filesystem::path style_image;
  std::shared_ptr<StyleModel> model;
};

/// Trains one model per style painting (style_id = file stem) and persists
///   <out>/<style_id>/{model.bin, style.png, hist.json} and <out>/index.json.
/// Fails with the list of offending styles if any training fails.
std::vector<StyleBankEntry> build_style_bank(const std::vector<std::filesystem::path>& style_images,
                                             const dataset::Manifest& content_manifest,
                                             const StyleTrainConfig& config,
                                             const std::filesystem::path& out_dir);

std::vector<StyleBankEntry> load_style_bank(const std::filesystem::path& bank_dir);

const StyleBankEntry& find_style(std::span<const StyleBankEntry> bank, const std::string& style_id);

}  // namespace atelier::style
