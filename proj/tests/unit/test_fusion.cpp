#include <gtest/gtest.h>
#include <torch/torch.h>

#include "atelier/error.hpp"
#include "atelier/fusion.hpp"
#include "gradcheck.hpp"

using namespace atelier;
using namespace atelier::t2i;

TEST(MaskedAffineFuse, ZeroMaskPassesNormalizedInputThrough) {
  torch::manual_seed(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = torch::randn({2, 3, 5, 4});
    auto out = masked_affine_fuse(x, torch::zeros({2, 1, 5, 4}), torch::randn({2, 3}),
                                  torch::randn({2, 3}));
    EXPECT_LE((out - x).abs().max().item<double>(), 1e-6);
  }
}

TEST(MaskedAffineFuse, FullMaskWithZeroAffineIsZero) {
  auto x = torch::randn({2, 3, 4, 4});
  auto out = masked_affine_fuse(x, torch::ones({2, 1, 4, 4}), torch::zeros({2, 3}), torch::zeros({2, 3}));
  EXPECT_EQ(out.abs().max().item<double>(), 0.0);
}

TEST(MaskedAffineFuse, MatchesElementwiseFormula) {
  auto x = torch::randn({1, 2, 3, 3});
  auto m = torch::rand({1, 1, 3, 3});
  auto g = torch::randn({1, 2});
  auto b = torch::randn({1, 2});
  auto out = masked_affine_fuse(x, m, g, b);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double xv = x[0][c][i][j].item<double>();
        const double mv = m[0][0][i][j].item<double>();
        const double expect = mv * (g[0][c].item<double>() * xv + b[0][c].item<double>()) + (1 - mv) * xv;
        EXPECT_NEAR(out[0][c][i][j].item<double>(), expect, 1e-5);
      }
    }
  }
}

TEST(MaskedAffineFuse, RejectsMismatchedShapes) {
  auto x = torch::randn({2, 3, 4, 4});
  EXPECT_THROW(masked_affine_fuse(x, torch::zeros({2, 1, 3, 4}), torch::ones({2, 3}), torch::zeros({2, 3})), Error);
  EXPECT_THROW(masked_affine_fuse(x, torch::zeros({2, 1, 4, 4}), torch::ones({2, 2}), torch::zeros({2, 3})), Error);
}

TEST(MaskPredictor, ZeroInputGivesOneHalf) {
  MaskPredictor net(4);
  auto m = net->forward(torch::zeros({1, 4, 5, 5}));
  EXPECT_EQ(m.sizes(), (std::vector<std::int64_t>{1, 1, 5, 5}));
  EXPECT_TRUE(torch::allclose(m, torch::full_like(m, 0.5)));
}

TEST(MaskPredictor, OutputInUnitInterval) {
  MaskPredictor net(3);
  auto m = net->forward(10 * torch::randn({2, 3, 6, 6}));
  EXPECT_GE(m.min().item<double>(), 0.0);
  EXPECT_LE(m.max().item<double>(), 1.0);
}

TEST(MaskedAffineFusion, InitialGammaOneBetaZero) {
  MaskedAffineFusion fusion(4, 6);
  auto s = torch::randn({3, 6});
  EXPECT_TRUE(torch::allclose(fusion->gamma_net(s), torch::ones({3, 4})));
  EXPECT_TRUE(torch::allclose(fusion->beta_net(s), torch::zeros({3, 4})));
  auto x = torch::randn({3, 4, 5, 5});
  auto out = fusion->forward(x, s);
  // Identity affine: output equals the normalized input whatever the mask.
  EXPECT_TRUE(torch::allclose(out.features, fusion->normalize(x), 1e-5, 1e-5));
}

TEST(MaskedAffineFusion, RejectsWrongChannels) {
  MaskedAffineFusion fusion(4, 6);
  EXPECT_THROW(fusion->forward(torch::randn({1, 3, 4, 4}), torch::randn({1, 6})), Error);
  EXPECT_THROW(fusion->forward(torch::randn({2, 4, 4, 4}), torch::randn({1, 6})), Error);
}

TEST(GradientCheck, MaskPredictor) {
  torch::manual_seed(3);
  MaskPredictor net(1);
  auto x = torch::randn({1, 1, 4, 4}, torch::requires_grad());
  std::vector<torch::Tensor> inputs{x};
  for (auto& p : net->parameters()) inputs.push_back(p);
  auto r = toy::gradcheck([&] { return net->forward(x).pow(2).sum(); }, inputs);
  EXPECT_LT(r.relative_error, 1e-2);
  EXPECT_GT(r.analytic_norm, 0.0);
}

TEST(GradientCheck, FusionBlock) {
  torch::manual_seed(4);
  MaskedAffineFusion fusion(1, 3);
  {
    torch::NoGradGuard no_grad;
    fusion->gamma_net->fc2->weight.normal_(0.0, 0.5);
    fusion->beta_net->fc2->weight.normal_(0.0, 0.5);
  }
  auto x = torch::randn({1, 1, 4, 4}, torch::requires_grad());
  auto s = torch::randn({1, 3}, torch::requires_grad());
  auto w = torch::randn({1, 1, 4, 4});
  std::vector<torch::Tensor> inputs{x, s};
  for (auto& p : fusion->parameters()) inputs.push_back(p);
  auto r = toy::gradcheck([&] { return (fusion->forward(x, s).features * w).sum(); }, inputs);
  EXPECT_LT(r.relative_error, 1e-2);
}
