#include <random>

#include <benchmark/benchmark.h>

#include "atelier/fid.hpp"

using namespace atelier;

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

void BM_Fid(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto dim = state.range(0);
  const eval::FeatureSet a(gaussian(rng, 4 * dim, dim), "x");
  const eval::FeatureSet b(gaussian(rng, 4 * dim, dim), "x");
  const LogSink quiet = [](std::string_view) {};
  for (auto _ : state) benchmark::DoNotOptimize(eval::fid(a, b, quiet));
}
BENCHMARK(BM_Fid)->Arg(18)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
