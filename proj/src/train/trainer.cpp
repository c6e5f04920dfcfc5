#include "gazegan/train/trainer.hpp"

#include "gazegan/data/image_io.hpp"
#include "gazegan/error.hpp"
#include "gazegan/model/inference.hpp"
#include "gazegan/model/pam.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace gazegan {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kStreamX = 1;
constexpr uint64_t kStreamY = 2;

std::string iteration_name(int64_t iter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%06lld", static_cast<long long>(iter));
  return buf;
}

}  // namespace

nlohmann::json to_json(const JointRecord& r) {
  return {{"phase", "joint"},
          {"iteration", r.iteration},
          {"lr", r.lr},
          {"gcm",
           {{"adv_x", r.gcm.adv_x}, {"adv_g", r.gcm.adv_g}, {"recon_x", r.gcm.recon_x}, {"total_g", r.gcm.total_g}}},
          {"gam",
           {{"adv_y", r.gam.adv_y},
            {"adv_g", r.gam.adv_g},
            {"adv_x_yhat", r.gam.adv_x_yhat},
            {"recon_y", r.gam.recon_y},
            {"recon_synth", r.gam.recon_synth},
            {"latent", r.gam.latent},
            {"total_g", r.gam.total_g}}}};
}

TrainState::TrainState(const TrainConfig& cfg) : config(cfg) {
  config.validate();
  torch::manual_seed(config.seed);
  bundle = std::make_unique<NetworkBundle>(config.network);
  optimizers = std::make_unique<OptimizerSet>(*bundle, config.adam);
}

Checkpoint make_checkpoint(TrainState& state, const std::string& kind) {
  Checkpoint ck;
  ck.metadata["kind"] = kind;
  ck.metadata["pam_step"] = state.pam_step;
  ck.metadata["iteration"] = state.iteration;
  ck.metadata["network"] = to_json(state.config.network);
  ck.metadata["config"] = to_json(state.config);
  ck.metadata["config_digest"] = config_digest(state.config);
  ck.tensors = state.bundle->named_tensors();
  for (auto& [k, v] : state.optimizers->state_tensors()) ck.tensors[k] = v;
  return ck;
}

void restore_checkpoint(TrainState& state, const Checkpoint& ck) {
  const auto net = network_config_from_json(ck.metadata.at("network"));
  if (to_json(net) != to_json(state.config.network)) {
    throw Error(ErrorKind::Checkpoint, "checkpoint network configuration differs from the run's");
  }
  state.bundle->load_tensors(ck.tensors, {"gx", "gy", "er", "gpre", "dx", "dy"});
  state.optimizers->load_state_tensors(ck.tensors);
  state.pam_step = ck.metadata.at("pam_step").get<int64_t>();
  state.iteration = ck.metadata.at("iteration").get<int64_t>();
}

std::unique_ptr<NetworkBundle> load_bundle(const fs::path& path, const std::vector<std::string>& required,
                                           Checkpoint* out) {
  auto ck = read_checkpoint(path);
  if (!ck.metadata.contains("network")) throw Error(ErrorKind::Checkpoint, "checkpoint has no network metadata");
  auto bundle = std::make_unique<NetworkBundle>(network_config_from_json(ck.metadata.at("network")));
  bundle->load_tensors(ck.tensors, required);
  if (out) *out = std::move(ck);
  return bundle;
}

Dataset load_training_data(const TrainConfig& config) {
  if (config.data_dir.empty()) throw Error(ErrorKind::Config, "paths.data is not set");
  LoadOptions opts;
  opts.split_seed = config.seed;
  opts.resolution = config.network.resolution;
  const auto landmarks = config.landmarks.empty() ? config.data_dir / "landmarks.jsonl" : config.landmarks;
  return load_dataset(config.data_dir, landmarks, opts);
}

namespace {

// Keeps log records that precede the resumed state, so a crash between a log
// write and the next checkpoint does not duplicate lines.
void truncate_log(const fs::path& log, int64_t pam_step, int64_t iteration) {
  if (!fs::exists(log)) return;
  std::ifstream in(log);
  std::vector<std::string> kept;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    const auto phase = j.value("phase", "");
    if ((phase == "pam" && j.value("step", int64_t{0}) < pam_step) ||
        (phase == "joint" && j.value("iteration", int64_t{0}) < iteration)) {
      kept.push_back(line);
    }
  }
  in.close();
  std::ofstream out(log, std::ios::trunc);
  for (const auto& l : kept) out << l << '\n';
}

class Trainer {
 public:
  Trainer(const TrainConfig& config, const TrainOptions& options)
      : options_(options), state_(config), dataset_(load_training_data(config)) {
    out_ = config.output_dir;
    fs::create_directories(out_ / "checkpoints");
    if (dataset_.resolution() != config.network.resolution) {
      throw Error(ErrorKind::Config, "dataset resolution does not match model.resolution");
    }
  }

  TrainSummary run() {
    const auto& cfg = state_.config;
    const auto latest = out_ / "checkpoints" / "latest.ckpt";
    bool resumed = false;
    if (options_.resume && fs::exists(latest)) {
      restore_checkpoint(state_, read_checkpoint(latest));
      resumed = true;
    }
    truncate_log(out_ / "log.ndjson", resumed ? state_.pam_step : 0, resumed ? state_.iteration : 0);
    log_.open(out_ / "log.ndjson", std::ios::app);
    if (!log_) throw Error(ErrorKind::Io, "cannot open log in " + out_.string());

    if (!state_.pam_done()) pretrain();
    if (options_.pam_only) return std::move(summary_);

    const Batch* sample_batch = nullptr;
    Batch preview;
    if (!dataset_.split().test_y.empty()) {
      preview = make_batch(dataset_, std::span(dataset_.split().test_y).first(1));
      sample_batch = &preview;
    }

    const auto dtype = state_.bundle->dtype();
    while (state_.iteration < cfg.total_iterations) {
      if (options_.stop_at && state_.iteration >= *options_.stop_at) break;
      const int64_t it = state_.iteration;
      JointRecord rec;
      rec.iteration = it;
      rec.lr = lr_schedule(it, cfg);
      state_.optimizers->set_main_lr(rec.lr);
      auto bx = make_batch(dataset_, sample_batch_ids(dataset_.split().train_x, cfg.batch_size, cfg.seed, kStreamX, it))
                    .to(dtype);
      auto by = make_batch(dataset_, sample_batch_ids(dataset_.split().train_y, cfg.batch_size, cfg.seed, kStreamY, it))
                    .to(dtype);
      rec.gcm = train_step_gcm(*state_.bundle, *state_.optimizers, bx, &by, cfg.weights, cfg.spectral_norm_power_iters);
      rec.gam = train_step_gam(*state_.bundle, *state_.optimizers, by, cfg.weights, cfg.spectral_norm_power_iters);
      state_.iteration = it + 1;
      log_ << to_json(rec).dump() << '\n';
      log_.flush();
      summary_.records.push_back(rec);
      if (!options_.quiet && (it % 50 == 0 || state_.iteration == cfg.total_iterations)) {
        std::cerr << "iter " << it << " recon_x " << rec.gcm.recon_x << " recon_y " << rec.gam.recon_y << '\n';
      }
      if (cfg.sample_every > 0 && state_.iteration % cfg.sample_every == 0 && sample_batch) {
        write_sample(*sample_batch);
      }
      if (cfg.checkpoint_every > 0 && state_.iteration % cfg.checkpoint_every == 0) {
        checkpoint("train", iteration_name(state_.iteration));
      }
    }
    if (checkpointed_iteration_ != state_.iteration) checkpoint("train", iteration_name(state_.iteration));
    return std::move(summary_);
  }

 private:
  void pretrain() {
    const auto& cfg = state_.config;
    if (!cfg.pam_checkpoint.empty()) {
      auto ck = read_checkpoint(cfg.pam_checkpoint);
      auto net = network_config_from_json(ck.metadata.at("network"));
      if (net.resolution != cfg.network.resolution || net.channel_divisor != cfg.network.channel_divisor) {
        throw Error(ErrorKind::Checkpoint, "pretraining checkpoint does not match the model configuration");
      }
      state_.bundle->load_tensors(ck.tensors, {"gpre"});
      state_.pam_step = cfg.pam_iterations;
      return;
    }
    PamOptions opts;
    opts.iterations = cfg.pam_iterations;
    opts.batch_size = cfg.batch_size;
    opts.seed = cfg.seed;
    summary_.pam_losses = pretrain_pam(*state_.bundle, state_.optimizers->pam(), dataset_, opts, state_.pam_step,
                                       [&](int64_t step, double loss) {
                                         log_ << nlohmann::json{{"phase", "pam"}, {"step", step}, {"loss", loss}}.dump()
                                              << '\n';
                                         state_.pam_step = step + 1;
                                         if (!options_.quiet && step % 100 == 0) {
                                           std::cerr << "pam " << step << " loss " << loss << '\n';
                                         }
                                         return true;
                                       });
    log_.flush();
    summary_.pam_checkpoint = checkpoint("pam", "pam");
  }

  fs::path checkpoint(const std::string& kind, const std::string& name) {
    auto ck = make_checkpoint(state_, kind);
    const auto path = out_ / "checkpoints" / (name + ".ckpt");
    write_checkpoint(ck, path);
    write_checkpoint(ck, out_ / "checkpoints" / "latest.ckpt");
    summary_.last_checkpoint = path;
    if (kind == "train") checkpointed_iteration_ = state_.iteration;
    return path;
  }

  void write_sample(const Batch& batch) {
    torch::NoGradGuard guard;
    auto b = batch.to(state_.bundle->dtype());
    const auto& sample = dataset_.sample(b.ids[0]);
    std::vector<torch::Tensor> frames{sample.pixels};
    auto corrected = correct_gaze(*state_.bundle, b)[0];
    frames.push_back(corrected.to(torch::kFloat32));
    const std::vector<double> t{0.0, 0.5, 1.0};
    for (auto& f : animate(*state_.bundle, sample, t)) frames.push_back(f.to(torch::kFloat32));
    emit_grid(frames, out_ / "samples" / (iteration_name(state_.iteration) + ".png"));
  }

  TrainOptions options_;
  TrainState state_;
  Dataset dataset_;
  fs::path out_;
  std::ofstream log_;
  TrainSummary summary_;
  int64_t checkpointed_iteration_ = -1;
};

}  // namespace

TrainSummary run_training(const TrainConfig& config, const TrainOptions& options) {
  Trainer trainer(config, options);
  return trainer.run();
}

}  // namespace gazegan
