#pragma once

#include "gazegan/nets/bundle.hpp"

#include <map>
#include <memory>

namespace gazegan {

struct AdamSettings {
  double lr_main = 1e-4;
  double lr_pam = 5e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
};

/// One Adam optimizer per independently updated parameter set.
class OptimizerSet {
 public:
  OptimizerSet(NetworkBundle& bundle, const AdamSettings& settings);

  torch::optim::Adam& gx() { return *gx_; }
  torch::optim::Adam& dx() { return *dx_; }
  torch::optim::Adam& gy() { return *gy_; }
  torch::optim::Adam& dy() { return *dy_; }
  torch::optim::Adam& pam() { return *pam_; }

  /// Learning rate of the four GAN optimizers.
  void set_main_lr(double lr);
  double main_lr() const;

  /// Adam moments and step counters keyed "opt.<set>.<index>.<field>".
  std::map<std::string, torch::Tensor> state_tensors();
  void load_state_tensors(const std::map<std::string, torch::Tensor>& tensors);

 private:
  std::vector<std::pair<std::string, torch::optim::Adam*>> all();

  std::unique_ptr<torch::optim::Adam> gx_, dx_, gy_, dy_, pam_;
};

}  // namespace gazegan
