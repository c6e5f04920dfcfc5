#include "gazegan/model/optimizers.hpp"

#include "gazegan/error.hpp"

namespace gazegan {

namespace {

std::unique_ptr<torch::optim::Adam> make_adam(std::vector<torch::Tensor> params, double lr,
                                              const AdamSettings& s) {
  return std::make_unique<torch::optim::Adam>(
      std::move(params), torch::optim::AdamOptions(lr).betas({s.beta1, s.beta2}));
}

}  // namespace

OptimizerSet::OptimizerSet(NetworkBundle& bundle, const AdamSettings& s) {
  gx_ = make_adam(bundle.gx_parameters(), s.lr_main, s);
  dx_ = make_adam(bundle.dx_parameters(), s.lr_main, s);
  gy_ = make_adam(bundle.gy_parameters(), s.lr_main, s);
  dy_ = make_adam(bundle.dy_parameters(), s.lr_main, s);
  pam_ = make_adam(bundle.gpre_parameters(), s.lr_pam, s);
}

std::vector<std::pair<std::string, torch::optim::Adam*>> OptimizerSet::all() {
  return {{"gx", gx_.get()}, {"dx", dx_.get()}, {"gy", gy_.get()}, {"dy", dy_.get()}, {"pam", pam_.get()}};
}

void OptimizerSet::set_main_lr(double lr) {
  for (auto* opt : {gx_.get(), dx_.get(), gy_.get(), dy_.get()}) {
    for (auto& group : opt->param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
    }
  }
}

double OptimizerSet::main_lr() const {
  return static_cast<const torch::optim::AdamOptions&>(gx_->param_groups().front().options()).lr();
}

std::map<std::string, torch::Tensor> OptimizerSet::state_tensors() {
  std::map<std::string, torch::Tensor> out;
  for (auto& [name, opt] : all()) {
    const auto& params = opt->param_groups().front().params();
    auto& state = opt->state();
    for (size_t i = 0; i < params.size(); ++i) {
      auto it = state.find(params[i].unsafeGetTensorImpl());
      if (it == state.end()) continue;
      auto& s = static_cast<torch::optim::AdamParamState&>(*it->second);
      const std::string key = "opt." + name + "." + std::to_string(i) + ".";
      out[key + "exp_avg"] = s.exp_avg();
      out[key + "exp_avg_sq"] = s.exp_avg_sq();
      out[key + "step"] = torch::tensor({s.step()}, torch::kInt64);
    }
  }
  return out;
}

void OptimizerSet::load_state_tensors(const std::map<std::string, torch::Tensor>& tensors) {
  torch::NoGradGuard guard;
  for (auto& [name, opt] : all()) {
    const auto& params = opt->param_groups().front().params();
    auto& state = opt->state();
    for (size_t i = 0; i < params.size(); ++i) {
      const std::string key = "opt." + name + "." + std::to_string(i) + ".";
      auto m = tensors.find(key + "exp_avg");
      auto v = tensors.find(key + "exp_avg_sq");
      auto step = tensors.find(key + "step");
      if (m == tensors.end() || v == tensors.end() || step == tensors.end()) {
        state.erase(params[i].unsafeGetTensorImpl());
        continue;
      }
      if (m->second.sizes() != params[i].sizes() || v->second.sizes() != params[i].sizes()) {
        throw Error(ErrorKind::Checkpoint, "optimizer state '" + key + "' has the wrong shape");
      }
      auto s = std::make_unique<torch::optim::AdamParamState>();
      s->step(step->second.item<int64_t>());
      s->exp_avg(m->second.to(params[i].scalar_type()).clone());
      s->exp_avg_sq(v->second.to(params[i].scalar_type()).clone());
      state[params[i].unsafeGetTensorImpl()] = std::move(s);
    }
  }
}

}  // namespace gazegan
