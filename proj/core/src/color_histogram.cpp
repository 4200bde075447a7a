#include "atelier/color_histogram.hpp"

#include <algorithm>
#include <cmath>

namespace atelier::styleselect {

ColorHistogram::ColorHistogram(int bins_per_channel, std::vector<double> values)
    : bins_(bins_per_channel), values_(std::move(values)) {
  if (bins_ < 1) throw Error("bins_per_channel must be >= 1");
  const auto expected = static_cast<std::size_t>(bins_) * bins_ * bins_;
  if (values_.size() != expected) {
    throw Error("histogram has " + std::to_string(values_.size()) + " bins, expected " +
                std::to_string(expected));
  }
  double total = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("histogram bins must be finite and >= 0");
    total += v;
  }
  if (total <= 0.0) throw Error("histogram has zero mass");
  // Already-normalized input is kept bit-exact so JSON round trips are lossless.
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& v : values_) v /= total;
  }
}

nlohmann::json ColorHistogram::to_json() const {
  return {{"bins_per_channel", bins_}, {"values", values_}};
}

ColorHistogram ColorHistogram::from_json(const nlohmann::json& j) {
  return ColorHistogram(j.at("bins_per_channel").get<int>(),
                        j.at("values").get<std::vector<double>>());
}

ColorHistogram color_histogram(const cv::Mat& rgb, int bins_per_channel) {
  if (bins_per_channel < 1) throw Error("bins_per_channel must be >= 1");
  if (rgb.empty() || rgb.type() != CV_8UC3) throw Error("color_histogram expects an RGB image");
  const int b = bins_per_channel;
  std::vector<double> counts(static_cast<std::size_t>(b) * b * b, 0.0);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<cv::Vec3b>(y);
    for (int x = 0; x < rgb.cols; ++x) {
      const int r = row[x][0] * b / 256;
      const int g = row[x][1] * b / 256;
      const int bl = row[x][2] * b / 256;
      counts[static_cast<std::size_t>((r * b + g) * b + bl)] += 1.0;
    }
  }
  return ColorHistogram(b, std::move(counts));
}

double intersection(const ColorHistogram& h, const ColorHistogram& g) {
  if (h.bins_per_channel() != g.bins_per_channel() || h.size() != g.size()) {
    throw Error("histogram bin-count mismatch");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += std::min(h.values()[j], g.values()[j]);
  // Rounding in the normalization can push the sum an ulp past 1.
  return std::min(s, 1.0);
}

}  // namespace atelier::styleselect
