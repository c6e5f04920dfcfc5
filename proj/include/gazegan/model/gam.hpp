#pragma once

#include "gazegan/model/gcm.hpp"

namespace gazegan {

/// l^y_recon: mean L1 between y and G_y's reconstruction y~.
torch::Tensor recon_loss_y(const torch::Tensor& y, const torch::Tensor& y_tilde);

/// l^{y~x}_recon: mean L1 between the corrected sample y~^x and its G_y
/// reconstruction y^.
torch::Tensor recon_loss_synth(const torch::Tensor& y_corrected, const torch::Tensor& y_hat);

/// l_fp over angle codes: |r_y - E_r(M'(y~))| + |r_{y~x} - E_r(M'(y^))|,
/// each a mean over elements.
torch::Tensor latent_recon_loss(const AngleCode& r_y, const AngleCode& r_y_tilde,
                                const AngleCode& r_corrected, const AngleCode& r_y_hat);

/// l^y_adv = E[log D_y(y)] + E[log(1 - D_y(y~))].
torch::Tensor adv_loss_y(const torch::Tensor& real_logits, const torch::Tensor& fake_logits);

/// G_y(M(z), E_r(M'(z)), E_c(M'(z))) for a batch of images sharing `batch`'s
/// masks. Uncomposited; differentiable in G_y and E_r.
struct GyReconstruction {
  AngleCode r;
  torch::Tensor output;
};
GyReconstruction gy_reconstruct(NetworkBundle& bundle, const torch::Tensor& images, const Batch& batch);

/// y^ composited, from y~^x = correct_gaze(y). Used as the third D_x input.
torch::Tensor synthesize_yhat(NetworkBundle& bundle, const Batch& batch_y);

/// Every tensor of one synthesis-as-training forward pass.
struct GamForward {
  AngleCode r_y;
  torch::Tensor y_tilde;        // stage 1, raw
  torch::Tensor y_tilde_comp;   // composited
  torch::Tensor y_corrected;    // y~^x, constant
  AngleCode r_corrected;
  torch::Tensor y_hat;          // stage 2, raw
  torch::Tensor y_hat_comp;
};
GamForward gam_forward(NetworkBundle& bundle, const Batch& batch_y);

struct GamObjective {
  torch::Tensor adv_y;        // E[log(1 - D_y(y~))]
  torch::Tensor adv_x_yhat;   // E[log(1 - D_x(y^))]
  torch::Tensor recon_y;
  torch::Tensor recon_synth;
  torch::Tensor latent;
  torch::Tensor total;
};

/// Objective for G_y and E_r given a forward pass.
GamObjective gam_generator_objective(NetworkBundle& bundle, const Batch& batch_y, const GamForward& fwd,
                                     const LossWeights& weights);

struct GamReport {
  double adv_y = 0.0;  // l^y_adv seen by D_y before its update
  double adv_g = 0.0;
  double adv_x_yhat = 0.0;
  double recon_y = 0.0;
  double recon_synth = 0.0;
  double latent = 0.0;
  double total_g = 0.0;
};

/// One D_y update then one joint G_y/E_r update. G_x and E_c stay fixed.
GamReport train_step_gam(NetworkBundle& bundle, OptimizerSet& optimizers, const Batch& batch_y,
                         const LossWeights& weights, int power_iterations = 1);

}  // namespace gazegan
