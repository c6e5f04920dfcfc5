#include "gazegan/model/gam.hpp"

namespace gazegan {

torch::Tensor recon_loss_y(const torch::Tensor& y, const torch::Tensor& y_tilde) {
  return l1_mean(y, y_tilde);
}

torch::Tensor recon_loss_synth(const torch::Tensor& y_corrected, const torch::Tensor& y_hat) {
  return l1_mean(y_corrected, y_hat);
}

torch::Tensor latent_recon_loss(const AngleCode& r_y, const AngleCode& r_y_tilde,
                                const AngleCode& r_corrected, const AngleCode& r_y_hat) {
  return l1_mean(r_y.value, r_y_tilde.value) + l1_mean(r_corrected.value, r_y_hat.value);
}

torch::Tensor adv_loss_y(const torch::Tensor& real_logits, const torch::Tensor& fake_logits) {
  return mean_log_real(real_logits) + mean_log_fake(fake_logits);
}

GyReconstruction gy_reconstruct(NetworkBundle& bundle, const torch::Tensor& images, const Batch& batch) {
  auto comp = extract_eye_composites(images, batch.specs);
  auto c = bundle.content_code(comp);
  auto r = bundle.er->forward(comp);
  return {r, bundle.gy->forward(apply_mask(images, batch.masks), r, c)};
}

torch::Tensor synthesize_yhat(NetworkBundle& bundle, const Batch& batch_y) {
  torch::NoGradGuard guard;
  auto corrected = correct_gaze(bundle, batch_y);
  auto rec = gy_reconstruct(bundle, corrected, batch_y);
  return composite(rec.output, corrected, batch_y.masks);
}

GamForward gam_forward(NetworkBundle& bundle, const Batch& batch_y) {
  GamForward f;
  auto stage1 = gy_reconstruct(bundle, batch_y.images, batch_y);
  f.r_y = stage1.r;
  f.y_tilde = stage1.output;
  f.y_tilde_comp = composite(f.y_tilde, batch_y.images, batch_y.masks);
  f.y_corrected = correct_gaze(bundle, batch_y);
  auto stage2 = gy_reconstruct(bundle, f.y_corrected, batch_y);
  f.r_corrected = stage2.r;
  f.y_hat = stage2.output;
  f.y_hat_comp = composite(f.y_hat, f.y_corrected, batch_y.masks);
  return f;
}

GamObjective gam_generator_objective(NetworkBundle& bundle, const Batch& batch_y, const GamForward& f,
                                     const LossWeights& w) {
  GamObjective o;
  o.adv_y = mean_log_fake(discriminate(bundle.dy, f.y_tilde_comp, batch_y.specs));
  o.adv_x_yhat = mean_log_fake(discriminate(bundle.dx, f.y_hat_comp, batch_y.specs));
  o.recon_y = recon_loss_y(batch_y.images, f.y_tilde);
  o.recon_synth = recon_loss_synth(f.y_corrected, f.y_hat);
  auto r_tilde = bundle.er->forward(extract_eye_composites(f.y_tilde_comp, batch_y.specs));
  auto r_hat = bundle.er->forward(extract_eye_composites(f.y_hat_comp, batch_y.specs));
  o.latent = latent_recon_loss(f.r_y, r_tilde, f.r_corrected, r_hat);
  o.total = o.adv_y + w.lambda2 * o.adv_x_yhat + w.lambda3 * o.recon_y + w.lambda4 * o.recon_synth +
            w.lambda5 * o.latent;
  return o;
}

GamReport train_step_gam(NetworkBundle& bundle, OptimizerSet& optimizers, const Batch& batch_y,
                         const LossWeights& weights, int power_iterations) {
  GamReport report;
  auto fwd = gam_forward(bundle, batch_y);

  // D_y: ascend l^y_adv.
  bundle.dy->power_iterate(power_iterations);
  {
    auto real_logits = discriminate(bundle.dy, batch_y.images, batch_y.specs);
    auto fake_logits = discriminate(bundle.dy, fwd.y_tilde_comp.detach(), batch_y.specs);
    auto objective = adv_loss_y(real_logits, fake_logits);
    require_finite(objective, "D_y objective");
    report.adv_y = objective.item<double>();
    optimizers.dy().zero_grad();
    (-objective).backward();
    optimizers.dy().step();
  }

  // G_y and E_r.
  {
    auto dparams = bundle.dy_parameters();
    auto dxparams = bundle.dx_parameters();
    dparams.insert(dparams.end(), dxparams.begin(), dxparams.end());
    FreezeGuard frozen(std::move(dparams));
    auto o = gam_generator_objective(bundle, batch_y, fwd, weights);
    require_finite(o.total, "G_y objective");
    report.adv_g = o.adv_y.item<double>();
    report.adv_x_yhat = o.adv_x_yhat.item<double>();
    report.recon_y = o.recon_y.item<double>();
    report.recon_synth = o.recon_synth.item<double>();
    report.latent = o.latent.item<double>();
    report.total_g = o.total.item<double>();
    optimizers.gy().zero_grad();
    o.total.backward();
    optimizers.gy().step();
  }
  return report;
}

}  // namespace gazegan
