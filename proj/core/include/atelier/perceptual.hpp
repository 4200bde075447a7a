#pragma once

#include <map>
#include <string>

#include <torch/types.h>

#include "atelier/feature_extractor.hpp"

namespace atelier::style {

/// G = F F^T / (C H W) with F the C x (H W) unfolding. Accepts C x H x W
/// (returns C x C) or N x C x H x W (returns N x C x C).
torch::Tensor gram(const torch::Tensor& features);

/// Anisotropic total variation: sum of |horizontal| + |vertical| neighbour
/// differences, averaged over the batch for 4-D input.
torch::Tensor total_variation(const torch::Tensor& images);

struct PerceptualWeights {
  double content = 1.0;
  double style = 5.0;
  double tv = 1e-6;
};

struct PerceptualLosses {
  torch::Tensor content;
  torch::Tensor style;
  torch::Tensor tv;
  torch::Tensor total;
};

/// Style targets by layer name (1 x C x C or C x C).
using StyleGrams = std::map<std::string, torch::Tensor>;

StyleGrams style_grams(FeatureExtractor& extractor, const torch::Tensor& style_image);

/// content = MSE at the content layer; style = sum over layers of
/// MSE(gram(output_l), target_l); tv as above; total = weighted sum.
PerceptualLosses perceptual_losses(const torch::Tensor& output, const torch::Tensor& content_images,
                                   const StyleGrams& targets, FeatureExtractor& extractor,
                                   const PerceptualWeights& weights = {});

}  // namespace atelier::style
