#include <random>

#include <benchmark/benchmark.h>
#include <opencv2/core.hpp>

#include "atelier/color_histogram.hpp"

using namespace atelier::styleselect;

namespace {

struct Entry {
  std::string style_id;
  ColorHistogram histogram;
};

cv::Mat noise_image(int side, std::uint64_t seed) {
  cv::Mat img(side, side, CV_8UC3);
  cv::RNG rng(seed);
  rng.fill(img, cv::RNG::UNIFORM, cv::Scalar::all(0), cv::Scalar::all(256));
  return img;
}

void BM_ColorHistogram(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(color_histogram(img, 8));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_ColorHistogram)->Arg(64)->Arg(256);

void BM_SelectStyle(benchmark::State& state) {
  std::vector<Entry> bank;
  for (int i = 0; i < state.range(0); ++i) {
    bank.push_back({"s" + std::to_string(i), color_histogram(noise_image(32, 100 + i), 8)});
  }
  const auto h = color_histogram(noise_image(256, 7), 8);
  for (auto _ : state) benchmark::DoNotOptimize(select_style_index(h, std::span<const Entry>(bank)));
}
BENCHMARK(BM_SelectStyle)->Arg(30)->Arg(300);

}  // namespace
