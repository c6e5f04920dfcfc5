#pragma once

#include <torch/torch.h>

#include <optional>

namespace gazegan {

/// Floor applied to probabilities before taking logs.
inline constexpr double kLogEpsilon = 1e-8;

/// Mean absolute difference over all elements.
torch::Tensor l1_mean(const torch::Tensor& a, const torch::Tensor& b);

/// E[log D] with D = sigmoid(logit), probability floored at kLogEpsilon.
torch::Tensor mean_log_real(const torch::Tensor& logits);
/// E[log(1 - D)], computed as log(sigmoid(-logit)) with the same floor.
torch::Tensor mean_log_fake(const torch::Tensor& logits);

/// Hyper-parameters weighting the loss terms. All default to 1.
struct LossWeights {
  double lambda1 = 1.0;  // G_x reconstruction
  double lambda2 = 1.0;  // D_x adversarial term on G_y's synthetic reconstruction
  double lambda3 = 1.0;  // G_y reconstruction
  double lambda4 = 1.0;  // G_y reconstruction of corrected samples
  double lambda5 = 1.0;  // latent angle-code reconstruction

  void validate() const;
};

/// Raised when a training objective is NaN or infinite.
void require_finite(const torch::Tensor& value, const char* what);

/// Sets requires_grad(false) on a parameter set for the guard's lifetime.
class FreezeGuard {
 public:
  explicit FreezeGuard(std::vector<torch::Tensor> params);
  ~FreezeGuard();
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<torch::Tensor> params_;
  std::vector<bool> previous_;
};

}  // namespace gazegan
