#pragma once

#include <concepts>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "atelier/error.hpp"

namespace atelier::styleselect {

inline constexpr int kDefaultBinsPerChannel = 8;

/// Joint RGB histogram over B^3 bins, normalized to sum 1. Bin index of a
/// pixel is (r_bin * B + g_bin) * B + b_bin with c_bin = c * B / 256.
class ColorHistogram {
 public:
  ColorHistogram() = default;
  /// Normalizes `values` to unit sum. All entries must be >= 0 with a positive total.
  ColorHistogram(int bins_per_channel, std::vector<double> values);

  int bins_per_channel() const { return bins_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  nlohmann::json to_json() const;
  static ColorHistogram from_json(const nlohmann::json& j);

 private:
  int bins_ = 0;
  std::vector<double> values_;
};

ColorHistogram color_histogram(const cv::Mat& rgb, int bins_per_channel = kDefaultBinsPerChannel);

/// Histogram intersection: sum_j min(h_j, g_j).
double intersection(const ColorHistogram& h, const ColorHistogram& g);

template <typename E>
concept StyleCandidate = requires(const E& e) {
  { e.style_id } -> std::convertible_to<std::string>;
  { e.histogram } -> std::convertible_to<const ColorHistogram&>;
};

/// Index of the best-matching entry by histogram intersection. Ties go to the
/// lexicographically smallest style_id, so the answer does not depend on bank order.
template <StyleCandidate E>
std::size_t select_style_index(const ColorHistogram& image_hist, std::span<const E> bank) {
  if (bank.empty()) throw Error("cannot select a style from an empty bank");
  std::size_t best = 0;
  double best_score = intersection(image_hist, bank[0].histogram);
  for (std::size_t i = 1; i < bank.size(); ++i) {
    const double s = intersection(image_hist, bank[i].histogram);
    if (s > best_score || (s == best_score && bank[i].style_id < bank[best].style_id)) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

template <StyleCandidate E>
const E& select_style(const ColorHistogram& image_hist, std::span<const E> bank) {
  return bank[select_style_index(image_hist, bank)];
}

template <StyleCandidate E>
const E& select_style(const cv::Mat& rgb, std::span<const E> bank) {
  if (bank.empty()) throw Error("cannot select a style from an empty bank");
  return select_style(color_histogram(rgb, bank.front().histogram.bins_per_channel()), bank);
}

}  // namespace atelier::styleselect
