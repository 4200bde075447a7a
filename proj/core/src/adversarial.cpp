#include "atelier/adversarial.hpp"

#include <torch/torch.h>

#include "atelier/error.hpp"

namespace atelier::t2i {

torch::Tensor LossBundle::discriminator_total() const {
  return d_real + 0.5 * (d_fake_generated + d_fake_mismatched);
}

torch::Tensor LossBundle::generator_total(double lambda_damsm) const {
  return damsm.defined() ? g_adv + lambda_damsm * damsm : g_adv;
}

bool LossBundle::all_finite() const {
  for (const auto* t : {&g_adv, &d_real, &d_fake_generated, &d_fake_mismatched, &damsm}) {
    if (t->defined() && !torch::isfinite(*t).all().item<bool>()) return false;
  }
  return true;
}

LossBundle hinge_losses(const torch::Tensor& real_matched, const torch::Tensor& fake_matched,
                        const torch::Tensor& real_mismatched) {
  LossBundle b;
  b.d_real = torch::relu(1.0 - real_matched).mean();
  b.d_fake_generated = torch::relu(1.0 + fake_matched).mean();
  b.d_fake_mismatched = torch::relu(1.0 + real_mismatched).mean();
  b.g_adv = -fake_matched.mean();
  return b;
}

torch::Tensor derange(const torch::Tensor& sentences) {
  if (sentences.size(0) < 2) throw Error("mismatched captions need a batch of at least 2");
  return torch::roll(sentences, 1, 0);
}

LossBundle adversarial_losses(Discriminator& d, const torch::Tensor& real_batch,
                              const torch::Tensor& fake_batch, const torch::Tensor& matched_s,
                              const torch::Tensor& mismatched_s) {
  if (real_batch.size(0) < 2) throw Error("adversarial losses need a batch of at least 2");
  const auto real_features = d->features(real_batch);
  return hinge_losses(d->score(real_features, matched_s), d->forward(fake_batch, matched_s),
                      d->score(real_features, mismatched_s));
}

}  // namespace atelier::t2i
