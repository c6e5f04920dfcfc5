#include "gazegan/nets/bundle.hpp"

#include "gazegan/error.hpp"

namespace gazegan {

NetworkBundle::NetworkBundle(const NetworkConfig& config) : config_(config) {
  config_.validate();
  gx = GeneratorX(config_);
  gy = GeneratorY(config_);
  er = AngleEncoder(config_);
  gpre = ContentAutoencoder(config_);
  dx = Discriminator(config_);
  dy = Discriminator(config_);
  for (auto& [name, module] : modules()) initialize_parameters(*module, config_.init_std);
}

std::vector<std::pair<std::string, torch::nn::Module*>> NetworkBundle::modules() const {
  return {{"gx", gx.ptr().get()},     {"gy", gy.ptr().get()}, {"er", er.ptr().get()},
          {"gpre", gpre.ptr().get()}, {"dx", dx.ptr().get()}, {"dy", dy.ptr().get()}};
}

void NetworkBundle::to(torch::ScalarType dtype) {
  for (auto& [name, module] : modules()) module->to(dtype);
}

torch::ScalarType NetworkBundle::dtype() const {
  return gx->parameters().front().scalar_type();
}

ContentCode NetworkBundle::content_code(const torch::Tensor& composites) {
  torch::NoGradGuard guard;
  if (!config_.use_content_code) {
    return ContentCode{torch::zeros({composites.size(0), kContentDim}, composites.options())};
  }
  return ContentCode{gpre->encode(composites).value.detach()};
}

std::vector<torch::Tensor> NetworkBundle::gx_parameters() const { return gx->parameters(); }

std::vector<torch::Tensor> NetworkBundle::gy_parameters() const {
  auto p = gy->parameters();
  auto e = er->parameters();
  p.insert(p.end(), e.begin(), e.end());
  return p;
}

std::vector<torch::Tensor> NetworkBundle::gpre_parameters() const { return gpre->parameters(); }
std::vector<torch::Tensor> NetworkBundle::dx_parameters() const { return dx->parameters(); }
std::vector<torch::Tensor> NetworkBundle::dy_parameters() const { return dy->parameters(); }

std::map<std::string, torch::Tensor> NetworkBundle::named_tensors() const {
  std::map<std::string, torch::Tensor> out;
  for (const auto& [prefix, module] : modules()) {
    for (const auto& item : module->named_parameters(true)) out[prefix + "." + item.key()] = item.value();
    for (const auto& item : module->named_buffers(true)) out[prefix + "." + item.key()] = item.value();
  }
  return out;
}

void NetworkBundle::load_tensors(const std::map<std::string, torch::Tensor>& tensors,
                                 const std::vector<std::string>& required_prefixes) {
  torch::NoGradGuard guard;
  for (auto& [name, target] : named_tensors()) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      for (const auto& prefix : required_prefixes) {
        if (name.rfind(prefix + ".", 0) == 0) {
          throw Error(ErrorKind::Checkpoint, "checkpoint is missing tensor '" + name + "'");
        }
      }
      continue;
    }
    if (it->second.sizes() != target.sizes()) {
      throw Error(ErrorKind::Checkpoint, "checkpoint tensor '" + name + "' has the wrong shape");
    }
    target.copy_(it->second.to(target.scalar_type()));
  }
}

nlohmann::json to_json(const NetworkConfig& c) {
  return {{"resolution", c.resolution},   {"channel_divisor", c.channel_divisor},
          {"leaky_slope", c.leaky_slope}, {"norm_eps", c.norm_eps},
          {"init_std", c.init_std},       {"use_content_code", c.use_content_code}};
}

NetworkConfig network_config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.resolution = j.at("resolution").get<int64_t>();
  c.channel_divisor = j.at("channel_divisor").get<int64_t>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.norm_eps = j.at("norm_eps").get<double>();
  c.init_std = j.at("init_std").get<double>();
  c.use_content_code = j.at("use_content_code").get<bool>();
  return c;
}

}  // namespace gazegan
