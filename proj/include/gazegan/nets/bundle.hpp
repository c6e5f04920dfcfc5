#pragma once

#include "gazegan/nets/networks.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>

namespace gazegan {

/// All networks of the model: G_x, G_y with E_r, G_pre (whose encoder is
/// E_c), and the two discriminators with independent weights.
class NetworkBundle {
 public:
  explicit NetworkBundle(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }

  GeneratorX gx{nullptr};
  GeneratorY gy{nullptr};
  AngleEncoder er{nullptr};
  ContentAutoencoder gpre{nullptr};
  Discriminator dx{nullptr};
  Discriminator dy{nullptr};

  /// Converts every parameter and buffer.
  void to(torch::ScalarType dtype);
  torch::ScalarType dtype() const;

  /// E_c on a batch of composites without gradient; zeros when the content
  /// code is disabled (ablation).
  ContentCode content_code(const torch::Tensor& composites);

  /// Parameter groups, one per optimizer.
  std::vector<torch::Tensor> gx_parameters() const;
  std::vector<torch::Tensor> gy_parameters() const;  // G_y and E_r
  std::vector<torch::Tensor> gpre_parameters() const;
  std::vector<torch::Tensor> dx_parameters() const;
  std::vector<torch::Tensor> dy_parameters() const;

  /// Parameters and buffers keyed as "<net>.<path>", net in {gx,gy,er,gpre,dx,dy}.
  std::map<std::string, torch::Tensor> named_tensors() const;

  /// Copies tensors with matching names; throws Error(Checkpoint) on a shape
  /// mismatch or when a name under one of `required_prefixes` is absent.
  void load_tensors(const std::map<std::string, torch::Tensor>& tensors,
                    const std::vector<std::string>& required_prefixes);

 private:
  std::vector<std::pair<std::string, torch::nn::Module*>> modules() const;

  NetworkConfig config_;
};

nlohmann::json to_json(const NetworkConfig& config);
NetworkConfig network_config_from_json(const nlohmann::json& j);

}  // namespace gazegan
