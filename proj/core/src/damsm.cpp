#include "atelier/damsm.hpp"

#include <torch/torch.h>

#include "atelier/error.hpp"
#include "atelier/generator.hpp"

namespace atelier::t2i {
namespace nn = torch::nn;

RegionEncoderImpl::RegionEncoderImpl(std::int64_t embed_dim, std::int64_t in_res,
                                     std::int64_t base_channels) {
  const auto downs = stage_count(in_res) - 1;  // down to 4x4
  trunk = register_module("trunk", nn::Sequential());
  std::int64_t ch = 3;
  for (std::int64_t i = 0; i < downs; ++i) {
    const auto next = std::min<std::int64_t>(base_channels * 8, base_channels << i);
    trunk->push_back(nn::Conv2d(nn::Conv2dOptions(ch, next, 4).stride(2).padding(1)));
    trunk->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
    ch = next;
  }
  project = register_module("project", nn::Conv2d(nn::Conv2dOptions(ch, embed_dim, 1)));
}

torch::Tensor RegionEncoderImpl::forward(const torch::Tensor& images) {
  auto h = project(trunk->forward(images));
  return h.flatten(2);
}

torch::Tensor damsm_scores(const torch::Tensor& regions, const torch::Tensor& words,
                           const torch::Tensor& lengths, const DamsmOptions& options) {
  if (regions.dim() != 3 || words.dim() != 3 || lengths.dim() != 1) {
    throw Error("damsm expects regions B x D x R, words B x T x D and lengths B");
  }
  const auto batch = regions.size(0);
  if (words.size(0) != batch || lengths.size(0) != batch || words.size(2) != regions.size(1)) {
    throw Error("damsm regions/words shapes disagree");
  }
  std::vector<torch::Tensor> columns;
  columns.reserve(static_cast<std::size_t>(batch));
  for (std::int64_t j = 0; j < batch; ++j) {
    const auto len = lengths[j].item<std::int64_t>();
    const auto w = words[j].narrow(0, 0, len);                   // L x D
    auto attn = torch::einsum("ld,bdr->blr", {w, regions});      // B x L x R
    attn = torch::softmax(attn, 1);                              // normalize over words
    attn = torch::softmax(attn * options.gamma1, 2);             // attend over regions
    const auto context = torch::einsum("blr,bdr->bld", {attn, regions});  // B x L x D
    const auto sim = torch::cosine_similarity(context, w.unsqueeze(0), 2, 1e-8);  // B x L
    columns.push_back(torch::logsumexp(sim * options.gamma2, 1) / options.gamma2);
  }
  return torch::stack(columns, 1);  // S[i][j]: image i, caption j
}

torch::Tensor damsm_loss(const torch::Tensor& regions, const torch::Tensor& words,
                         const torch::Tensor& lengths, const DamsmOptions& options) {
  if (regions.size(0) < 2) return torch::zeros({}, regions.options());
  const auto logits = damsm_scores(regions, words, lengths, options) * options.gamma3;
  const auto target = torch::arange(logits.size(0), torch::kInt64);
  const auto image_to_text = torch::nll_loss(torch::log_softmax(logits, 1), target);
  const auto text_to_image = torch::nll_loss(torch::log_softmax(logits.t(), 1), target);
  return 0.5 * (image_to_text + text_to_image);
}

}  // namespace atelier::t2i
