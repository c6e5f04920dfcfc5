#include "gazegan/model/losses.hpp"

#include "gazegan/error.hpp"

#include <cmath>

namespace gazegan {

torch::Tensor l1_mean(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw Error(ErrorKind::Shape, "l1_mean: operand shapes differ");
  return (a - b).abs().mean();
}

torch::Tensor mean_log_real(const torch::Tensor& logits) {
  return torch::sigmoid(logits).clamp_min(kLogEpsilon).log().mean();
}

torch::Tensor mean_log_fake(const torch::Tensor& logits) {
  return torch::sigmoid(-logits).clamp_min(kLogEpsilon).log().mean();
}

void LossWeights::validate() const {
  for (double l : {lambda1, lambda2, lambda3, lambda4, lambda5}) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw Error(ErrorKind::Config, "loss weights must be finite and non-negative");
    }
  }
}

void require_finite(const torch::Tensor& value, const char* what) {
  const double v = value.item<double>();
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::Numeric, std::string("non-finite ") + what + " (" + std::to_string(v) + ")");
  }
}

FreezeGuard::FreezeGuard(std::vector<torch::Tensor> params) : params_(std::move(params)) {
  previous_.reserve(params_.size());
  for (auto& p : params_) {
    previous_.push_back(p.requires_grad());
    p.requires_grad_(false);
  }
}

FreezeGuard::~FreezeGuard() {
  for (size_t i = 0; i < params_.size(); ++i) params_[i].requires_grad_(previous_[i]);
}

}  // namespace gazegan
