#include <benchmark/benchmark.h>
#include <torch/torch.h>

#include "atelier/perceptual.hpp"
#include "atelier/style_bank.hpp"

using namespace atelier::style;

namespace {

void BM_Gram(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  const auto f = torch::randn({4, state.range(0), 64, 64});
  for (auto _ : state) benchmark::DoNotOptimize(gram(f));
}
BENCHMARK(BM_Gram)->Arg(16)->Arg(64);

void BM_Stylize(benchmark::State& state) {
  StyleModel model{"bench", TransformNet(TransformNetOptions{}), {}};
  const auto img = torch::rand({3, state.range(0), state.range(0)}) * 2 - 1;
  for (auto _ : state) benchmark::DoNotOptimize(stylize(img, model));
}
BENCHMARK(BM_Stylize)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
