#pragma once

#include "gazegan/data/dataset.hpp"
#include "gazegan/nets/bundle.hpp"

#include <functional>

namespace gazegan {

/// Mirror-learning objective on eye composites C = [L|R]:
/// mean L1(G_pre(C), C) + mean L1(G_pre(F(C)), C), F a horizontal flip.
/// Since F(C) = [F(R)|F(L)] this covers both eyes reconstructed from
/// themselves and from the mirrored other eye.
torch::Tensor mirror_loss(ContentAutoencoder& gpre, const torch::Tensor& composites);
/// Same objective for any reconstruction function.
torch::Tensor mirror_loss(const std::function<torch::Tensor(const torch::Tensor&)>& reconstruct,
                          const torch::Tensor& composites);

/// Eye composites of train_Y samples drawn for pretraining step `step`.
torch::Tensor mirror_batch(const Dataset& dataset, int batch_size, uint64_t seed, int64_t step);

struct PamOptions {
  int64_t iterations = 10000;
  int batch_size = 8;
  uint64_t seed = 0;
};

/// Called after every step with (step, loss); returning false stops early.
using PamCallback = std::function<bool(int64_t step, double loss)>;

/// Runs Adam (the optimizer set's PAM optimizer) on mirror_loss for steps
/// [first_step, options.iterations). Returns the loss of every step run.
/// Throws Error(Numeric) on a non-finite loss; parameters then hold the last
/// finite update.
std::vector<double> pretrain_pam(NetworkBundle& bundle, torch::optim::Adam& optimizer, const Dataset& dataset,
                                 const PamOptions& options, int64_t first_step = 0,
                                 const PamCallback& callback = {});

/// E_c without gradient. Always the encoder output, regardless of whether the
/// generators consume it.
ContentCode extract_content(NetworkBundle& bundle, const torch::Tensor& composites);

/// Mean over samples of the L1 norm of E_c(C) - E_c(F(C)).
double mirror_code_gap(NetworkBundle& bundle, const torch::Tensor& composites);

}  // namespace gazegan
