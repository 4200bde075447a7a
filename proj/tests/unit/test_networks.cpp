#include <gtest/gtest.h>
#include <torch/torch.h>

#include "atelier/discriminator.hpp"
#include "atelier/error.hpp"
#include "atelier/generator.hpp"

using namespace atelier;
using namespace atelier::t2i;

namespace {

GeneratorOptions toy_generator() { return GeneratorOptions{16, 8, 4, 64}; }

textenc::TextEmbedding embedding_of(const torch::Tensor& sentence) {
  return {torch::zeros({1, sentence.size(0)}), sentence, 1};
}

}  // namespace

TEST(Generator, StageCount) {
  EXPECT_EQ(stage_count(8), 2);
  EXPECT_EQ(stage_count(64), 5);
  EXPECT_EQ(stage_count(256), 7);
  EXPECT_THROW(stage_count(48), Error);
}

TEST(Generator, ToyOutputShapeAndRange) {
  torch::manual_seed(0);
  Generator g(toy_generator());
  auto out = g->forward(torch::randn({3, 16}) * 10, torch::randn({3, 8}) * 10);
  EXPECT_EQ(out.sizes(), (std::vector<std::int64_t>{3, 3, 64, 64}));
  EXPECT_LE(out.abs().max().item<double>(), 1.0);
}

TEST(Generator, OneMaskPerFusionLayerInUnitInterval) {
  torch::manual_seed(0);
  Generator g(toy_generator());
  g->forward(torch::randn({2, 16}), torch::randn({2, 8}));
  auto masks = g->last_masks();
  EXPECT_EQ(masks.size(), static_cast<std::size_t>(2 * stage_count(64)));
  for (const auto& m : masks) {
    EXPECT_EQ(m.size(1), 1);
    EXPECT_GE(m.min().item<double>(), 0.0);
    EXPECT_LE(m.max().item<double>(), 1.0);
  }
}

TEST(Generator, GenerateIsDeterministic) {
  torch::manual_seed(0);
  Generator g(toy_generator());
  g->eval();
  auto z = torch::randn({16});
  auto e = embedding_of(torch::randn({8}));
  auto a = generate(g, z, e);
  auto b = generate(g, z, e);
  EXPECT_EQ(a.sizes(), (std::vector<std::int64_t>{3, 64, 64}));
  EXPECT_TRUE(torch::equal(a, b));
}

TEST(Generator, ConditioningDimensionChecked) {
  Generator g(toy_generator());
  EXPECT_THROW(generate(g, torch::randn({16}), embedding_of(torch::randn({9}))), Error);
  EXPECT_THROW(generate(g, torch::randn({15}), embedding_of(torch::randn({8}))), Error);
}

TEST(Discriminator, ScoresPerImageAndFinite) {
  torch::manual_seed(0);
  Discriminator d(DiscriminatorOptions{4, 8, 64});
  auto scores = d->forward(torch::rand({5, 3, 64, 64}) * 2 - 1, torch::randn({5, 8}));
  EXPECT_EQ(scores.sizes(), (std::vector<std::int64_t>{5}));
  EXPECT_TRUE(torch::isfinite(scores).all().item<bool>());
  auto single = discriminate(d, torch::zeros({3, 64, 64}), torch::randn({8}));
  EXPECT_EQ(single.numel(), 1);
}

TEST(Discriminator, ConditioningChangesScore) {
  torch::manual_seed(0);
  Discriminator d(DiscriminatorOptions{4, 8, 64});
  auto img = torch::rand({1, 3, 64, 64});
  auto a = d->forward(img, torch::randn({1, 8}));
  auto b = d->forward(img, torch::randn({1, 8}));
  EXPECT_NE(a.item<double>(), b.item<double>());
}

TEST(Discriminator, ResolutionMismatchIsAnError) {
  Discriminator d(DiscriminatorOptions{4, 8, 64});
  EXPECT_THROW(d->forward(torch::zeros({1, 3, 32, 32}), torch::zeros({1, 8})), Error);
  EXPECT_THROW(d->forward(torch::zeros({2, 3, 64, 64}), torch::zeros({1, 8})), Error);
}
