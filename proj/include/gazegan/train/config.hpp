#pragma once

#include "gazegan/model/losses.hpp"
#include "gazegan/model/optimizers.hpp"
#include "gazegan/nets/networks.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>

namespace gazegan {

/// Everything a training run depends on. Read from an INI-style file with
/// [model], [train], [loss] and [paths] sections; any key may be omitted.
struct TrainConfig {
  NetworkConfig network;
  AdamSettings adam;
  LossWeights weights;

  int batch_size = 8;
  uint64_t seed = 0;
  int64_t warm_iterations = 20000;
  int64_t total_iterations = 40000;
  int64_t pam_iterations = 10000;
  int spectral_norm_power_iters = 1;
  int64_t checkpoint_every = 1000;  // 0 = only at the end
  int64_t sample_every = 1000;      // 0 = never

  std::filesystem::path data_dir;
  std::filesystem::path landmarks;  // empty = <data_dir>/landmarks.jsonl
  std::filesystem::path output_dir = "run";
  std::filesystem::path pam_checkpoint;  // skip pretraining when set

  /// Throws Error(Config) on an inconsistent configuration.
  void validate() const;
};

TrainConfig load_train_config(const std::filesystem::path& path);
void save_train_config(const TrainConfig& config, const std::filesystem::path& path);

/// Applies "section.key=value" assignments on top of `config`.
void apply_overrides(TrainConfig& config, std::span<const std::string> assignments);

nlohmann::json to_json(const TrainConfig& config);

/// SHA-256 of the canonical JSON of every field except paths.
std::string config_digest(const TrainConfig& config);

/// Learning rate of the GAN optimizers at joint iteration `iter`: constant
/// until warm_iterations, then linear down to 0 at total_iterations; 0 after.
double lr_schedule(int64_t iter, const TrainConfig& config);

}  // namespace gazegan
