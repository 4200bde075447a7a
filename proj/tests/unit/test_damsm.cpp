#include <cmath>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "atelier/damsm.hpp"
#include "atelier/error.hpp"
#include "gradcheck.hpp"

using namespace atelier;
using namespace atelier::t2i;

namespace {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const torch::Tensor& t) {
  Mat m(static_cast<std::size_t>(t.size(0)), std::vector<double>(static_cast<std::size_t>(t.size(1))));
  auto d = t.to(torch::kDouble).contiguous();
  for (std::int64_t i = 0; i < t.size(0); ++i)
    for (std::int64_t j = 0; j < t.size(1); ++j) m[i][j] = d[i][j].item<double>();
  return m;
}

/// Scalar-loop evaluation of the attention-pooled similarity for one
/// (regions D x R, words L x D) pair.
double oracle_score(const Mat& regions, const Mat& words, double g1, double g2) {
  const std::size_t D = regions.size(), R = regions[0].size(), L = words.size();
  Mat a(L, std::vector<double>(R));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t r = 0; r < R; ++r) {
      double s = 0;
      for (std::size_t d = 0; d < D; ++d) s += words[l][d] * regions[d][r];
      a[l][r] = s;
    }
  // softmax over words (per region)
  for (std::size_t r = 0; r < R; ++r) {
    double z = 0;
    for (std::size_t l = 0; l < L; ++l) z += std::exp(a[l][r]);
    for (std::size_t l = 0; l < L; ++l) a[l][r] = std::exp(a[l][r]) / z;
  }
  double pooled = 0;
  for (std::size_t l = 0; l < L; ++l) {
    double z = 0;
    for (std::size_t r = 0; r < R; ++r) z += std::exp(g1 * a[l][r]);
    std::vector<double> ctx(D, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
      const double w = std::exp(g1 * a[l][r]) / z;
      for (std::size_t d = 0; d < D; ++d) ctx[d] += w * regions[d][r];
    }
    double dot = 0, nc = 0, nw = 0;
    for (std::size_t d = 0; d < D; ++d) {
      dot += ctx[d] * words[l][d];
      nc += ctx[d] * ctx[d];
      nw += words[l][d] * words[l][d];
    }
    pooled += std::exp(g2 * dot / (std::sqrt(nc) * std::sqrt(nw)));
  }
  return std::log(pooled) / g2;
}

}  // namespace

TEST(Damsm, BatchOfOneIsZero) {
  auto loss = damsm_loss(torch::randn({1, 4, 16}), torch::randn({1, 3, 4}), torch::tensor({3}));
  EXPECT_EQ(loss.item<double>(), 0.0);
}

TEST(Damsm, IdenticalPairsGiveLn2) {
  auto regions = torch::randn({1, 4, 16}).repeat({2, 1, 1});
  auto words = torch::randn({1, 3, 4}).repeat({2, 1, 1});
  auto loss = damsm_loss(regions, words, torch::tensor({3, 3}));
  EXPECT_NEAR(loss.item<double>(), std::log(2.0), 1e-6);
}

TEST(Damsm, ScoresMatchScalarOracle) {
  torch::manual_seed(5);
  const DamsmOptions opt;
  auto regions = torch::randn({3, 5, 6});
  auto words = torch::randn({3, 4, 5});
  auto lengths = torch::tensor({4, 2, 3});
  auto s = damsm_scores(regions, words, lengths, opt);
  ASSERT_EQ(s.sizes(), (std::vector<std::int64_t>{3, 3}));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto len = lengths[j].item<std::int64_t>();
      const double expect = oracle_score(to_mat(regions[i]), to_mat(words[j].narrow(0, 0, len)),
                                         opt.gamma1, opt.gamma2);
      EXPECT_NEAR(s[i][j].item<double>(), expect, 1e-4) << i << "," << j;
    }
  }
}

TEST(Damsm, PaddedWordsAreIgnored) {
  auto regions = torch::randn({2, 4, 8});
  auto words = torch::randn({2, 5, 4});
  auto lengths = torch::tensor({2, 3});
  auto garbage = words.clone();
  garbage[0].narrow(0, 2, 3).fill_(100.0);
  EXPECT_TRUE(torch::allclose(damsm_loss(regions, words, lengths), damsm_loss(regions, garbage, lengths)));
}

TEST(Damsm, ShapeErrors) {
  EXPECT_THROW(damsm_scores(torch::randn({2, 4, 8}), torch::randn({2, 3, 5}), torch::tensor({3, 3})), Error);
  EXPECT_THROW(damsm_scores(torch::randn({2, 4, 8}), torch::randn({3, 3, 4}), torch::tensor({3, 3})), Error);
}

TEST(Damsm, GradientMatchesFiniteDifferences) {
  torch::manual_seed(6);
  auto regions = torch::randn({2, 2, 4}, torch::requires_grad());
  auto words = torch::randn({2, 2, 2}, torch::requires_grad());
  auto lengths = torch::tensor({2, 2});
  auto r = toy::gradcheck([&] { return damsm_loss(regions, words, lengths); }, {regions, words});
  EXPECT_LT(r.relative_error, 1e-2);
  EXPECT_GT(r.analytic_norm, 0.0);
}

TEST(Damsm, RegionEncoderShape) {
  RegionEncoder enc(6, 64, 4);
  auto out = enc->forward(torch::zeros({2, 3, 64, 64}));
  EXPECT_EQ(out.sizes(), (std::vector<std::int64_t>{2, 6, 16}));
}

TEST(Damsm, ToyOverfitTrendsDown) {
  torch::manual_seed(7);
  auto regions = torch::randn({4, 6, 16}, torch::requires_grad());
  auto words = torch::randn({4, 3, 6}, torch::requires_grad());
  auto lengths = torch::tensor({3, 3, 3, 3});
  torch::optim::Adam opt({regions, words}, torch::optim::AdamOptions(0.05));
  std::vector<double> curve;
  for (int step = 0; step < 100; ++step) {
    auto loss = damsm_loss(regions, words, lengths);
    curve.push_back(loss.item<double>());
    opt.zero_grad();
    loss.backward();
    opt.step();
  }
  double first = 0, last = 0;
  for (int i = 0; i < 10; ++i) {
    first += curve[i];
    last += curve[90 + i];
  }
  EXPECT_LT(last, first);
}
