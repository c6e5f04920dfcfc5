#include "gazegan/model/pam.hpp"

#include "gazegan/error.hpp"
#include "gazegan/model/losses.hpp"

namespace gazegan {

namespace {
constexpr uint64_t kPamStream = 0x70616d;
}

torch::Tensor mirror_loss(const std::function<torch::Tensor(const torch::Tensor&)>& reconstruct,
                          const torch::Tensor& composites) {
  return l1_mean(reconstruct(composites), composites) + l1_mean(reconstruct(hflip(composites)), composites);
}

torch::Tensor mirror_loss(ContentAutoencoder& gpre, const torch::Tensor& composites) {
  return mirror_loss([&](const torch::Tensor& c) { return gpre->forward(c).reconstruction; }, composites);
}

torch::Tensor mirror_batch(const Dataset& dataset, int batch_size, uint64_t seed, int64_t step) {
  const auto& pool = dataset.split().train_y;
  if (pool.empty()) throw Error(ErrorKind::Data, "pretraining needs a non-empty train_Y split");
  auto ids = sample_batch_ids(pool, batch_size, seed, kPamStream, step);
  auto batch = make_batch(dataset, ids);
  return extract_eye_composites(batch.images, batch.specs);
}

std::vector<double> pretrain_pam(NetworkBundle& bundle, torch::optim::Adam& optimizer, const Dataset& dataset,
                                 const PamOptions& options, int64_t first_step, const PamCallback& callback) {
  if (dataset.split().train_y.empty()) throw Error(ErrorKind::Data, "pretraining needs a non-empty train_Y split");
  std::vector<double> losses;
  const auto dtype = bundle.dtype();
  for (int64_t step = first_step; step < options.iterations; ++step) {
    auto composites = mirror_batch(dataset, options.batch_size, options.seed, step).to(dtype);
    auto loss = mirror_loss(bundle.gpre, composites);
    require_finite(loss, "mirror loss");
    optimizer.zero_grad();
    loss.backward();
    optimizer.step();
    losses.push_back(loss.item<double>());
    if (callback && !callback(step, losses.back())) break;
  }
  return losses;
}

ContentCode extract_content(NetworkBundle& bundle, const torch::Tensor& composites) {
  torch::NoGradGuard guard;
  return bundle.gpre->encode(composites);
}

double mirror_code_gap(NetworkBundle& bundle, const torch::Tensor& composites) {
  auto a = extract_content(bundle, composites).value;
  auto b = extract_content(bundle, hflip(composites)).value;
  return (a - b).abs().sum(1).mean().item<double>();
}

}  // namespace gazegan
