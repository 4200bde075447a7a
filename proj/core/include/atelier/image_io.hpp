#pragma once

#include <filesystem>
#include <optional>

#include <opencv2/core.hpp>
#include <torch/types.h>

namespace atelier::image {

// All cv::Mat images crossing this boundary are 8-bit, 3-channel, RGB order.

cv::Mat load_rgb(const std::filesystem::path& path);
std::optional<cv::Mat> try_load_rgb(const std::filesystem::path& path);
void save_rgb(const std::filesystem::path& path, const cv::Mat& rgb);

/// RGB uint8 -> float 3xHxW in [-1, 1]. Resizes to side x side when side > 0.
torch::Tensor to_tensor(const cv::Mat& rgb, int side = 0);
/// RGB uint8 -> uint8 3xHxW, optionally resized.
torch::Tensor to_byte_tensor(const cv::Mat& rgb, int side = 0);
/// float 3xHxW in [-1, 1] -> RGB uint8 (values are clamped and rounded).
cv::Mat from_tensor(const torch::Tensor& chw);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace atelier::image
