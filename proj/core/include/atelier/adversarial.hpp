#pragma once

#include <torch/types.h>

#include "atelier/discriminator.hpp"

namespace atelier::t2i {

/// All terms are scalar tensors. Discriminator-side terms follow the hinge
/// objective; g_adv = -mean(D(fake, matched)).
struct LossBundle {
  torch::Tensor g_adv;
  torch::Tensor d_real;
  torch::Tensor d_fake_generated;
  torch::Tensor d_fake_mismatched;
  torch::Tensor damsm;

  /// d_real + (d_fake_generated + d_fake_mismatched) / 2
  torch::Tensor discriminator_total() const;
  /// g_adv + lambda_damsm * damsm (damsm counts as 0 when undefined)
  torch::Tensor generator_total(double lambda_damsm) const;
  bool all_finite() const;
};

/// Hinge terms from raw discriminator scores.
LossBundle hinge_losses(const torch::Tensor& real_matched, const torch::Tensor& fake_matched,
                        const torch::Tensor& real_mismatched);

/// Within-batch derangement (shift by one). Requires batch >= 2.
torch::Tensor derange(const torch::Tensor& sentences);

/// Scores the three pairings with `d` and returns the hinge bundle.
LossBundle adversarial_losses(Discriminator& d, const torch::Tensor& real_batch,
                              const torch::Tensor& fake_batch, const torch::Tensor& matched_s,
                              const torch::Tensor& mismatched_s);

}  // namespace atelier::t2i
