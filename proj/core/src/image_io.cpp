#include "atelier/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "atelier/error.hpp"

namespace atelier::image {
namespace fs = std::filesystem;

std::optional<cv::Mat> try_load_rgb(const fs::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception&) {
    return std::nullopt;
  }
  if (bgr.empty() || bgr.channels() != 3) return std::nullopt;
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

cv::Mat load_rgb(const fs::path& path) {
  auto img = try_load_rgb(path);
  if (!img) throw Error("cannot decode image " + path.string());
  return *img;
}

void save_rgb(const fs::path& path, const cv::Mat& rgb) {
  if (rgb.empty() || rgb.type() != CV_8UC3) {
    throw Error("save_rgb expects a non-empty 8-bit RGB image");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr)) throw Error("cannot write image " + path.string());
}

torch::Tensor to_byte_tensor(const cv::Mat& rgb, int side) {
  if (rgb.empty() || rgb.type() != CV_8UC3) throw Error("expected an 8-bit 3-channel image");
  cv::Mat src = rgb;
  if (side > 0 && (rgb.cols != side || rgb.rows != side)) {
    cv::resize(rgb, src, cv::Size(side, side), 0, 0, cv::INTER_AREA);
  }
  if (!src.isContinuous()) src = src.clone();
  return torch::from_blob(src.data, {src.rows, src.cols, 3}, torch::kUInt8)
      .permute({2, 0, 1})
      .contiguous();
}

torch::Tensor to_tensor(const cv::Mat& rgb, int side) {
  return to_byte_tensor(rgb, side).to(torch::kFloat32).div_(127.5).sub_(1.0);
}

cv::Mat from_tensor(const torch::Tensor& chw) {
  if (chw.dim() != 3 || chw.size(0) != 3) throw Error("expected a 3xHxW tensor");
  auto hwc = chw.detach()
                 .to(torch::kFloat32)
                 .clamp(-1.0, 1.0)
                 .add(1.0)
                 .mul(127.5)
                 .round()
                 .to(torch::kUInt8)
                 .permute({1, 2, 0})
                 .contiguous();
  cv::Mat out(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC3);
  std::memcpy(out.data, hwc.data_ptr<std::uint8_t>(), static_cast<std::size_t>(hwc.numel()));
  return out;
}

bool has_image_extension(const fs::path& path) {
  static constexpr std::array<std::string_view, 6> kExt = {".png", ".jpg", ".jpeg",
                                                           ".bmp", ".webp", ".tif"};
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::find(kExt.begin(), kExt.end(), ext) != kExt.end();
}

}  // namespace atelier::image
