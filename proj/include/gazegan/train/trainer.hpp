#pragma once

#include "gazegan/model/gam.hpp"
#include "gazegan/model/gcm.hpp"
#include "gazegan/nets/checkpoint.hpp"
#include "gazegan/train/config.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace gazegan {

/// Losses of one joint iteration.
struct JointRecord {
  int64_t iteration = 0;
  double lr = 0.0;
  GcmReport gcm;
  GamReport gam;
};

nlohmann::json to_json(const JointRecord& record);

/// Model and optimizer state plus progress counters; what a checkpoint holds.
struct TrainState {
  TrainConfig config;
  std::unique_ptr<NetworkBundle> bundle;
  std::unique_ptr<OptimizerSet> optimizers;
  int64_t pam_step = 0;   // pretraining steps completed
  int64_t iteration = 0;  // joint iterations completed

  explicit TrainState(const TrainConfig& config);
  bool pam_done() const { return pam_step >= config.pam_iterations; }
};

/// Checkpoint metadata keys: "kind" ("pam" or "train"), "pam_step",
/// "iteration", "network", "config", "config_digest".
Checkpoint make_checkpoint(TrainState& state, const std::string& kind);
/// Restores parameters, optimizer moments and counters.
void restore_checkpoint(TrainState& state, const Checkpoint& checkpoint);

/// Builds a bundle from any checkpoint; `required` names the networks that
/// must be present (e.g. {"gpre"} for a pretraining checkpoint).
std::unique_ptr<NetworkBundle> load_bundle(const std::filesystem::path& path,
                                           const std::vector<std::string>& required,
                                           Checkpoint* checkpoint = nullptr);

struct TrainOptions {
  /// Continue from <output>/checkpoints/latest.ckpt when it exists.
  bool resume = false;
  /// Stop (after checkpointing) once this many joint iterations are done in
  /// total. Simulates an interrupted run.
  std::optional<int64_t> stop_at;
  /// Only pretrain; the joint phase is skipped.
  bool pam_only = false;
  bool quiet = true;
};

struct TrainSummary {
  std::vector<double> pam_losses;        // steps run by this call
  std::vector<JointRecord> records;      // iterations run by this call
  std::filesystem::path pam_checkpoint;  // empty if pretraining was loaded
  std::filesystem::path last_checkpoint;
};

/// Pretraining (unless done or loaded), then per iteration one GCM step and
/// one GAM step on fresh batches. Writes <output>/log.ndjson,
/// <output>/checkpoints/{pam,iter_NNNNNN,latest}.ckpt and
/// <output>/samples/iter_NNNNNN.png. On a non-finite loss the run aborts with
/// Error(Numeric) and the last written checkpoint is left in place.
TrainSummary run_training(const TrainConfig& config, const TrainOptions& options = {});

/// Loads the dataset named by a config.
Dataset load_training_data(const TrainConfig& config);

}  // namespace gazegan
