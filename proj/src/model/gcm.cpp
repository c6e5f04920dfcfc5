#include "gazegan/model/gcm.hpp"

#include "gazegan/model/gam.hpp"

namespace gazegan {

torch::Tensor recon_loss_x(const torch::Tensor& x, const torch::Tensor& x_tilde) {
  return l1_mean(x, x_tilde);
}

torch::Tensor adv_loss_x(const torch::Tensor& real_logits, const torch::Tensor& fake_x_logits,
                         const std::optional<torch::Tensor>& fake_yhat_logits) {
  auto value = mean_log_real(real_logits) + mean_log_fake(fake_x_logits);
  if (fake_yhat_logits) value = value + mean_log_fake(*fake_yhat_logits);
  return value;
}

torch::Tensor discriminate(Discriminator& d, const torch::Tensor& faces, std::span<const MaskSpec> specs) {
  return d->forward(faces, extract_eye_composites(faces, specs));
}

torch::Tensor gx_inpaint(NetworkBundle& bundle, const Batch& batch) {
  auto c = bundle.content_code(extract_eye_composites(batch.images, batch.specs));
  return bundle.gx->forward(apply_mask(batch.images, batch.masks), c);
}

torch::Tensor correct_gaze(NetworkBundle& bundle, const Batch& batch) {
  torch::NoGradGuard guard;
  return composite(gx_inpaint(bundle, batch), batch.images, batch.masks);
}

torch::Tensor correct_gaze(NetworkBundle& bundle, const ImageSample& sample) {
  return correct_gaze(bundle, make_batch(sample).to(bundle.dtype()))[0];
}

GcmObjective gcm_generator_objective(NetworkBundle& bundle, const Batch& batch_x,
                                     const LossWeights& weights) {
  GcmObjective o;
  o.x_tilde = gx_inpaint(bundle, batch_x);
  auto faked = composite(o.x_tilde, batch_x.images, batch_x.masks);
  o.adv = mean_log_fake(discriminate(bundle.dx, faked, batch_x.specs));
  o.recon = recon_loss_x(batch_x.images, o.x_tilde);
  o.total = o.adv + weights.lambda1 * o.recon;
  return o;
}

GcmReport train_step_gcm(NetworkBundle& bundle, OptimizerSet& optimizers, const Batch& batch_x,
                         const Batch* batch_y, const LossWeights& weights,
                         int power_iterations) {
  GcmReport report;

  std::optional<torch::Tensor> yhat_logits;
  torch::Tensor yhat;
  if (batch_y) {
    torch::NoGradGuard guard;
    yhat = synthesize_yhat(bundle, *batch_y);
  }

  // D_x: ascend l^x_adv.
  bundle.dx->power_iterate(power_iterations);
  auto x_tilde = gx_inpaint(bundle, batch_x);
  auto x_fake = composite(x_tilde, batch_x.images, batch_x.masks);
  {
    auto real_logits = discriminate(bundle.dx, batch_x.images, batch_x.specs);
    auto fake_logits = discriminate(bundle.dx, x_fake.detach(), batch_x.specs);
    if (batch_y) yhat_logits = discriminate(bundle.dx, yhat, batch_y->specs);
    auto objective = adv_loss_x(real_logits, fake_logits, yhat_logits);
    require_finite(objective, "D_x objective");
    report.adv_x = objective.item<double>();
    optimizers.dx().zero_grad();
    (-objective).backward();
    optimizers.dx().step();
  }

  // G_x: descend l^x_adv + lambda1 l^x_recon.
  {
    FreezeGuard frozen(bundle.dx_parameters());
    auto adv = mean_log_fake(discriminate(bundle.dx, x_fake, batch_x.specs));
    auto recon = recon_loss_x(batch_x.images, x_tilde);
    auto total = adv + weights.lambda1 * recon;
    require_finite(total, "G_x objective");
    report.adv_g = adv.item<double>();
    report.recon_x = recon.item<double>();
    report.total_g = total.item<double>();
    optimizers.gx().zero_grad();
    total.backward();
    optimizers.gx().step();
  }
  return report;
}

}  // namespace gazegan
