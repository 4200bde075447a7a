#include <benchmark/benchmark.h>
#include <torch/torch.h>

#include "atelier/fusion.hpp"

using namespace atelier::t2i;

namespace {

void BM_MaskedAffineFuse(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  const auto c = state.range(0);
  const auto x = torch::randn({8, c, 32, 32});
  const auto m = torch::rand({8, 1, 32, 32});
  const auto g = torch::randn({8, c});
  const auto b = torch::randn({8, c});
  for (auto _ : state) benchmark::DoNotOptimize(masked_affine_fuse(x, m, g, b));
}
BENCHMARK(BM_MaskedAffineFuse)->Arg(16)->Arg(64);

void BM_FusionLayer(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  MaskedAffineFusion layer(state.range(0), 256);
  const auto x = torch::randn({8, state.range(0), 32, 32});
  const auto s = torch::randn({8, 256});
  for (auto _ : state) benchmark::DoNotOptimize(layer->forward(x, s).features);
}
BENCHMARK(BM_FusionLayer)->Arg(16)->Arg(64);

}  // namespace
