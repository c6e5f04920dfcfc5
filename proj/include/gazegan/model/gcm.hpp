#pragma once

#include "gazegan/data/dataset.hpp"
#include "gazegan/model/losses.hpp"
#include "gazegan/model/optimizers.hpp"

#include <optional>

namespace gazegan {

/// l^x_recon: mean L1 between x and G_x's raw in-painting.
torch::Tensor recon_loss_x(const torch::Tensor& x, const torch::Tensor& x_tilde);

/// l^x_adv = E[log D_x(x)] + E[log(1 - D_x(x~))] + E[log(1 - D_x(y^))]. The
/// last term is skipped when `fake_yhat_logits` is empty (standalone GCM).
torch::Tensor adv_loss_x(const torch::Tensor& real_logits, const torch::Tensor& fake_x_logits,
                         const std::optional<torch::Tensor>& fake_yhat_logits = std::nullopt);

/// D(face, M'(face)) logits.
torch::Tensor discriminate(Discriminator& d, const torch::Tensor& faces, std::span<const MaskSpec> specs);

/// x~ = G_x(M(x), E_c(M'(x))), uncomposited, differentiable in G_x.
torch::Tensor gx_inpaint(NetworkBundle& bundle, const Batch& batch);

/// y~^x: G_x's in-painting composited into the input. No gradient.
torch::Tensor correct_gaze(NetworkBundle& bundle, const Batch& batch);
torch::Tensor correct_gaze(NetworkBundle& bundle, const ImageSample& sample);

struct GcmObjective {
  torch::Tensor x_tilde;  // raw G_x output
  torch::Tensor adv;      // E[log(1 - D_x(x~))], the G_x-dependent part of l^x_adv
  torch::Tensor recon;
  torch::Tensor total;    // adv + lambda1 * recon
};

/// Generator-side objective of G_x on a domain-X batch.
GcmObjective gcm_generator_objective(NetworkBundle& bundle, const Batch& batch_x,
                                     const LossWeights& weights);

struct GcmReport {
  double adv_x = 0.0;  // l^x_adv seen by D_x before its update
  double adv_g = 0.0;
  double recon_x = 0.0;
  double total_g = 0.0;
};

/// One D_x update (ascent on l^x_adv) then one G_x update (descent on
/// l^x_adv + lambda1 l^x_recon). When `batch_y` is given, D_x also sees G_y's
/// reconstruction y^ of G_x-corrected domain-Y samples, with no gradient to
/// G_x or G_y.
GcmReport train_step_gcm(NetworkBundle& bundle, OptimizerSet& optimizers, const Batch& batch_x,
                         const Batch* batch_y, const LossWeights& weights,
                         int power_iterations = 1);

}  // namespace gazegan
