#include "atelier/perceptual.hpp"

#include <torch/torch.h>

#include "atelier/error.hpp"

namespace atelier::style {

torch::Tensor gram(const torch::Tensor& features) {
  if (features.dim() == 3) return gram(features.unsqueeze(0)).squeeze(0);
  if (features.dim() != 4 || features.numel() == 0) {
    throw Error("gram expects a non-empty C x H x W or N x C x H x W tensor");
  }
  const auto n = features.size(0), c = features.size(1);
  const auto hw = features.size(2) * features.size(3);
  const auto f = features.reshape({n, c, hw});
  return torch::bmm(f, f.transpose(1, 2)) / static_cast<double>(c * hw);
}

torch::Tensor total_variation(const torch::Tensor& images) {
  if (images.dim() == 3) return total_variation(images.unsqueeze(0));
  if (images.dim() != 4) throw Error("total_variation expects an image tensor");
  const auto n = images.size(0);
  auto tv = torch::zeros({}, images.options());
  if (images.size(3) > 1) {
    tv = tv + (images.narrow(3, 1, images.size(3) - 1) - images.narrow(3, 0, images.size(3) - 1)).abs().sum();
  }
  if (images.size(2) > 1) {
    tv = tv + (images.narrow(2, 1, images.size(2) - 1) - images.narrow(2, 0, images.size(2) - 1)).abs().sum();
  }
  return tv / static_cast<double>(n);
}

StyleGrams style_grams(FeatureExtractor& extractor, const torch::Tensor& style_image) {
  torch::NoGradGuard no_grad;
  const auto input = style_image.dim() == 3 ? style_image.unsqueeze(0) : style_image;
  const auto feats = extractor.extract(input);
  StyleGrams out;
  for (std::size_t i = 0; i < feats.size(); ++i) out[extractor.layer_names()[i]] = gram(feats[i]);
  return out;
}

PerceptualLosses perceptual_losses(const torch::Tensor& output, const torch::Tensor& content_images,
                                   const StyleGrams& targets, FeatureExtractor& extractor,
                                   const PerceptualWeights& weights) {
  const auto& names = extractor.layer_names();
  for (const auto& name : names) {
    if (!targets.count(name)) throw Error("missing style gram for layer " + name);
  }
  const auto out_feats = extractor.extract(output);
  torch::Tensor content_feat;
  {
    torch::NoGradGuard no_grad;
    content_feat = extractor.extract(content_images)[extractor.content_layer()];
  }
  PerceptualLosses l;
  l.content = torch::mse_loss(out_feats[extractor.content_layer()], content_feat);
  l.style = torch::zeros({}, output.options());
  for (std::size_t i = 0; i < out_feats.size(); ++i) {
    const auto g = gram(out_feats[i]);
    l.style = l.style + torch::mse_loss(g, targets.at(names[i]).expand_as(g));
  }
  l.tv = total_variation(output);
  l.total = weights.content * l.content + weights.style * l.style + weights.tv * l.tv;
  return l;
}

}  // namespace atelier::style
