#include "gazegan/train/config.hpp"

#include "gazegan/error.hpp"
#include "gazegan/nets/bundle.hpp"
#include "gazegan/nets/checkpoint.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <set>

namespace gazegan {

namespace pt = boost::property_tree;

void TrainConfig::validate() const {
  try {
    network.validate();
    weights.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (warm_iterations < 0 || total_iterations < 0 || pam_iterations < 0) fail("iteration counts must be >= 0");
  if (warm_iterations > total_iterations) fail("warm_iterations must not exceed total_iterations");
  if (!(adam.lr_main > 0.0) || !(adam.lr_pam > 0.0)) fail("learning rates must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    fail("Adam betas must lie in [0,1)");
  }
  if (spectral_norm_power_iters < 1) fail("spectral_norm_power_iters must be at least 1");
  if (checkpoint_every < 0 || sample_every < 0) fail("checkpoint_every and sample_every must be >= 0");
}

namespace {

pt::ptree to_ptree(const TrainConfig& c) {
  pt::ptree t;
  t.put("model.resolution", c.network.resolution);
  t.put("model.channel_divisor", c.network.channel_divisor);
  t.put("model.use_content_code", c.network.use_content_code);
  t.put("model.init_std", c.network.init_std);
  t.put("train.batch_size", c.batch_size);
  t.put("train.seed", c.seed);
  t.put("train.warm_iterations", c.warm_iterations);
  t.put("train.total_iterations", c.total_iterations);
  t.put("train.pam_iterations", c.pam_iterations);
  t.put("train.lr_main", c.adam.lr_main);
  t.put("train.lr_pam", c.adam.lr_pam);
  t.put("train.beta1", c.adam.beta1);
  t.put("train.beta2", c.adam.beta2);
  t.put("train.spectral_norm_power_iters", c.spectral_norm_power_iters);
  t.put("train.checkpoint_every", c.checkpoint_every);
  t.put("train.sample_every", c.sample_every);
  t.put("loss.lambda1", c.weights.lambda1);
  t.put("loss.lambda2", c.weights.lambda2);
  t.put("loss.lambda3", c.weights.lambda3);
  t.put("loss.lambda4", c.weights.lambda4);
  t.put("loss.lambda5", c.weights.lambda5);
  t.put("paths.data", c.data_dir.string());
  t.put("paths.landmarks", c.landmarks.string());
  t.put("paths.output", c.output_dir.string());
  t.put("paths.pam_checkpoint", c.pam_checkpoint.string());
  return t;
}

TrainConfig from_ptree(const pt::ptree& t, TrainConfig c) {
  static const std::set<std::string> known = [] {
    std::set<std::string> k;
    for (const auto& [section, keys] : to_ptree(TrainConfig{})) {
      for (const auto& [key, value] : keys) k.insert(section + "." + key);
    }
    return k;
  }();
  for (const auto& [section, keys] : t) {
    for (const auto& [key, value] : keys) {
      if (!known.count(section + "." + key)) throw Error(ErrorKind::Config, "unknown config key '" + section + "." + key + "'");
    }
  }
  try {
    c.network.resolution = t.get("model.resolution", c.network.resolution);
    c.network.channel_divisor = t.get("model.channel_divisor", c.network.channel_divisor);
    c.network.use_content_code = t.get("model.use_content_code", c.network.use_content_code);
    c.network.init_std = t.get("model.init_std", c.network.init_std);
    c.batch_size = t.get("train.batch_size", c.batch_size);
    c.seed = t.get("train.seed", c.seed);
    c.warm_iterations = t.get("train.warm_iterations", c.warm_iterations);
    c.total_iterations = t.get("train.total_iterations", c.total_iterations);
    c.pam_iterations = t.get("train.pam_iterations", c.pam_iterations);
    c.adam.lr_main = t.get("train.lr_main", c.adam.lr_main);
    c.adam.lr_pam = t.get("train.lr_pam", c.adam.lr_pam);
    c.adam.beta1 = t.get("train.beta1", c.adam.beta1);
    c.adam.beta2 = t.get("train.beta2", c.adam.beta2);
    c.spectral_norm_power_iters = t.get("train.spectral_norm_power_iters", c.spectral_norm_power_iters);
    c.checkpoint_every = t.get("train.checkpoint_every", c.checkpoint_every);
    c.sample_every = t.get("train.sample_every", c.sample_every);
    c.weights.lambda1 = t.get("loss.lambda1", c.weights.lambda1);
    c.weights.lambda2 = t.get("loss.lambda2", c.weights.lambda2);
    c.weights.lambda3 = t.get("loss.lambda3", c.weights.lambda3);
    c.weights.lambda4 = t.get("loss.lambda4", c.weights.lambda4);
    c.weights.lambda5 = t.get("loss.lambda5", c.weights.lambda5);
    c.data_dir = t.get("paths.data", c.data_dir.string());
    c.landmarks = t.get("paths.landmarks", c.landmarks.string());
    c.output_dir = t.get("paths.output", c.output_dir.string());
    c.pam_checkpoint = t.get("paths.pam_checkpoint", c.pam_checkpoint.string());
  } catch (const pt::ptree_error& e) {
    throw Error(ErrorKind::Config, std::string("bad config value: ") + e.what());
  }
  return c;
}

}  // namespace

TrainConfig load_train_config(const std::filesystem::path& path) {
  pt::ptree t;
  try {
    pt::read_ini(path.string(), t);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Config, std::string("cannot read config: ") + e.what());
  }
  auto c = from_ptree(t, TrainConfig{});
  c.validate();
  return c;
}

void save_train_config(const TrainConfig& config, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  try {
    pt::write_ini(path.string(), to_ptree(config));
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Io, std::string("cannot write config: ") + e.what());
  }
}

void apply_overrides(TrainConfig& config, std::span<const std::string> assignments) {
  pt::ptree t;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    const auto dot = a.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw Error(ErrorKind::Usage, "override must look like section.key=value: " + a);
    }
    t.put(pt::ptree::path_type(a.substr(0, eq), '.'), a.substr(eq + 1));
  }
  config = from_ptree(t, config);
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["network"] = to_json(c.network);
  j["adam"] = {{"lr_main", c.adam.lr_main}, {"lr_pam", c.adam.lr_pam}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}};
  j["loss"] = {{"lambda1", c.weights.lambda1}, {"lambda2", c.weights.lambda2}, {"lambda3", c.weights.lambda3},
               {"lambda4", c.weights.lambda4}, {"lambda5", c.weights.lambda5}};
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["warm_iterations"] = c.warm_iterations;
  j["total_iterations"] = c.total_iterations;
  j["pam_iterations"] = c.pam_iterations;
  j["spectral_norm_power_iters"] = c.spectral_norm_power_iters;
  j["checkpoint_every"] = c.checkpoint_every;
  j["sample_every"] = c.sample_every;
  return j;
}

std::string config_digest(const TrainConfig& config) { return sha256_hex(to_json(config).dump()); }

double lr_schedule(int64_t iter, const TrainConfig& config) {
  const double lr = config.adam.lr_main;
  if (iter < config.warm_iterations) return lr;
  if (iter >= config.total_iterations) return 0.0;
  const auto span = static_cast<double>(config.total_iterations - config.warm_iterations);
  return lr * static_cast<double>(config.total_iterations - iter) / span;
}

}  // namespace gazegan
