// Command-line front end: dataset preparation, training, inference and
// evaluation. Errors print "error[<category>]: <message>" on stderr and exit
// with the category's status code.

#include "gazegan/data/image_io.hpp"
#include "gazegan/data/toy.hpp"
#include "gazegan/error.hpp"
#include "gazegan/eval/report.hpp"
#include "gazegan/model/inference.hpp"
#include "gazegan/train/trainer.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace gazegan;
namespace fs = std::filesystem;

namespace {

struct ConfigFlags {
  fs::path config_file;
  fs::path data;
  fs::path output;
  std::optional<uint64_t> seed;
  std::optional<int64_t> resolution;
  std::optional<int> batch_size;
  std::vector<std::string> overrides;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "INI config file")->check(CLI::ExistingFile);
    app->add_option("--data", data, "dataset directory (X/, Y/, landmarks.jsonl)");
    app->add_option("--output", output, "run directory");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--resolution", resolution, "image size (multiple of 32)");
    app->add_option("--batch-size", batch_size, "batch size");
    app->add_option("--set", overrides, "section.key=value override, repeatable");
  }

  TrainConfig build() const {
    TrainConfig c = config_file.empty() ? TrainConfig{} : load_train_config(config_file);
    if (!data.empty()) c.data_dir = data;
    if (!output.empty()) c.output_dir = output;
    if (seed) c.seed = *seed;
    if (resolution) c.network.resolution = *resolution;
    if (batch_size) c.batch_size = *batch_size;
    apply_overrides(c, overrides);
    c.validate();
    return c;
  }
};

// Landmarks for a single input image: the record whose id equals the file
// stem, or the only record in the file.
ImageSample load_input(const fs::path& image, const fs::path& landmarks) {
  auto records = read_landmarks(landmarks);
  const auto stem = image.stem().string();
  const LandmarkRecord* found = nullptr;
  for (const auto& r : records) {
    if (r.id == stem) found = &r;
  }
  if (!found && records.size() == 1) found = &records.front();
  if (!found) throw Error(ErrorKind::Data, "no landmarks for '" + stem + "' in " + landmarks.string());
  ImageSample s{stem, Domain::Y, read_image(image), found->points};
  validate_sample(s);
  return s;
}

void require_resolution(const NetworkBundle& bundle, int64_t height, int64_t width) {
  const auto r = bundle.config().resolution;
  if (height != r || width != r) {
    throw Error(ErrorKind::Config, "input is " + std::to_string(height) + "x" + std::to_string(width) +
                                       " but the checkpoint was trained at " + std::to_string(r) + "x" +
                                       std::to_string(r));
  }
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Gaze correction and animation with in-painting GANs"};
  app.require_subcommand(1);

  // toy-data
  auto* toy = app.add_subcommand("toy-data", "Generate the procedural toy face dataset");
  fs::path toy_out;
  uint64_t toy_seed = 0;
  int toy_nx = 200, toy_ny = 200;
  ToyOptions toy_opts;
  toy->add_option("--out", toy_out, "output directory")->required();
  toy->add_option("--seed", toy_seed, "random seed");
  toy->add_option("--n-x", toy_nx, "domain-X faces");
  toy->add_option("--n-y", toy_ny, "domain-Y faces");
  toy->add_option("--resolution", toy_opts.resolution, "image size");
  toy->add_option("--n-test-x", toy_opts.n_test_x, "held-out X faces (default n/5)");
  toy->add_option("--n-test-y", toy_opts.n_test_y, "held-out Y faces (default n/5)");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Resize a raw X/Y image collection and fix its split");
  fs::path pre_in, pre_landmarks, pre_out;
  LoadOptions pre_opts;
  int64_t pre_res = 256;
  pre->add_option("--images", pre_in, "directory with X/ and Y/ subdirectories")->required();
  pre->add_option("--landmarks", pre_landmarks, "68-point landmarks, JSON lines")->required();
  pre->add_option("--out", pre_out, "output dataset directory")->required();
  pre->add_option("--resolution", pre_res, "output size");
  pre->add_option("--seed", pre_opts.split_seed, "split seed");
  pre->add_option("--n-test-x", pre_opts.n_test_x, "held-out X images");
  pre->add_option("--n-test-y", pre_opts.n_test_y, "held-out Y images");

  // pretrain
  auto* pam = app.add_subcommand("pretrain", "Pretrain the mirror autoencoder only");
  ConfigFlags pam_flags;
  pam_flags.add(pam);
  std::optional<int64_t> pam_iters;
  fs::path pam_copy;
  pam->add_option("--iterations", pam_iters, "pretraining steps");
  pam->add_option("--out", pam_copy, "also copy the checkpoint here");

  // train
  auto* train = app.add_subcommand("train", "Pretrain, then train both generators jointly");
  ConfigFlags train_flags;
  train_flags.add(train);
  bool resume = false, verbose = false;
  std::optional<int64_t> stop_at, total_iters;
  fs::path train_pam;
  train->add_option("--iterations", total_iters, "joint iterations (total)");
  train->add_option("--pam-checkpoint", train_pam, "skip pretraining, load this checkpoint")->check(CLI::ExistingFile);
  train->add_flag("--resume", resume, "continue from <output>/checkpoints/latest.ckpt");
  train->add_option("--stop-at", stop_at, "stop after this many joint iterations");
  train->add_flag("-v,--verbose", verbose, "progress on stderr");

  // correct
  auto* corr = app.add_subcommand("correct", "Redirect the gaze of one image toward the camera");
  fs::path corr_in, corr_lm, corr_ck, corr_out;
  corr->add_option("--input", corr_in, "input image")->required()->check(CLI::ExistingFile);
  corr->add_option("--landmarks", corr_lm, "landmarks file (record id = image stem)")->required()->check(CLI::ExistingFile);
  corr->add_option("--checkpoint", corr_ck, "trained checkpoint")->required()->check(CLI::ExistingFile);
  corr->add_option("--out", corr_out, "output PNG")->required();

  // animate
  auto* anim = app.add_subcommand("animate", "Sweep the gaze of one image and write a strip");
  fs::path anim_in, anim_lm, anim_ck, anim_out;
  int frames = 7;
  double t_min = 0.0, t_max = 1.0;
  anim->add_option("--input", anim_in, "input image")->required()->check(CLI::ExistingFile);
  anim->add_option("--landmarks", anim_lm, "landmarks file (record id = image stem)")->required()->check(CLI::ExistingFile);
  anim->add_option("--checkpoint", anim_ck, "trained checkpoint")->required()->check(CLI::ExistingFile);
  anim->add_option("--frames", frames, "number of frames")->check(CLI::PositiveNumber);
  anim->add_option("--t-min", t_min, "first interpolation weight");
  anim->add_option("--t-max", t_max, "last interpolation weight");
  anim->add_option("--out", anim_out, "output PNG strip")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a checkpoint on a dataset partition");
  fs::path ev_ck, ev_data, ev_out, ev_weights, ev_scatter, ev_moments;
  std::string ev_split = "test", ev_backend = "proxy";
  ev->add_option("--checkpoint", ev_ck, "trained checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", ev_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--split", ev_split, "partition: test or train");
  ev->add_option("--backend", ev_backend, "perceptual backend: proxy or torchscript");
  ev->add_option("--weights", ev_weights, "TorchScript perceptual model");
  ev->add_option("--out", ev_out, "report JSON")->required();
  ev->add_option("--scatter", ev_scatter, "angle-code scatter CSV");
  ev->add_option("--moments", ev_moments, "content-difference moments CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "error[" << to_string(ErrorKind::Usage) << "]: " << e.what() << '\n';
    return exit_code(ErrorKind::Usage);
  }

  if (*toy) {
    auto ds = generate_toy_dataset(toy_nx, toy_ny, toy_seed, toy_opts);
    save_dataset(ds, toy_out);
    std::cout << "wrote " << ds.samples().size() << " faces to " << toy_out << '\n';
  } else if (*pre) {
    pre_opts.resolution = pre_res;
    LoadReport report;
    auto ds = load_dataset(pre_in, pre_landmarks, pre_opts, &report);
    save_dataset(ds, pre_out);
    std::cout << "wrote " << report.loaded << " images to " << pre_out << " (" << report.skipped_missing_landmarks
              << " skipped without landmarks)\n";
  } else if (*pam) {
    auto cfg = pam_flags.build();
    if (pam_iters) cfg.pam_iterations = *pam_iters;
    TrainOptions opts;
    opts.pam_only = true;
    auto summary = run_training(cfg, opts);
    if (!pam_copy.empty()) {
      if (pam_copy.has_parent_path()) fs::create_directories(pam_copy.parent_path());
      fs::copy_file(summary.pam_checkpoint, pam_copy, fs::copy_options::overwrite_existing);
    }
    std::cout << "pretraining checkpoint: " << summary.pam_checkpoint.string() << '\n';
  } else if (*train) {
    auto cfg = train_flags.build();
    if (total_iters) {
      cfg.total_iterations = *total_iters;
      cfg.warm_iterations = std::min(cfg.warm_iterations, cfg.total_iterations);
    }
    if (!train_pam.empty()) cfg.pam_checkpoint = train_pam;
    cfg.validate();
    save_train_config(cfg, cfg.output_dir / "config.ini");
    TrainOptions opts;
    opts.resume = resume;
    opts.stop_at = stop_at;
    opts.quiet = !verbose;
    auto summary = run_training(cfg, opts);
    std::cout << "checkpoint: " << summary.last_checkpoint.string() << '\n';
  } else if (*corr) {
    auto bundle = load_bundle(corr_ck, {"gx", "gpre"});
    auto sample = load_input(corr_in, corr_lm);
    require_resolution(*bundle, sample.height(), sample.width());
    write_image(correct_gaze(*bundle, sample).to(torch::kFloat32), corr_out);
  } else if (*anim) {
    auto bundle = load_bundle(anim_ck, {"gx", "gy", "er", "gpre"});
    auto sample = load_input(anim_in, anim_lm);
    require_resolution(*bundle, sample.height(), sample.width());
    auto t = sweep_values(frames, t_min, t_max);
    auto out = animate(*bundle, sample, t);
    for (auto& f : out) f = f.to(torch::kFloat32);
    emit_grid(out, anim_out);
  } else if (*ev) {
    Checkpoint ck;
    auto bundle = load_bundle(ev_ck, {"gx", "gy", "er", "gpre"}, &ck);
    auto metric = PerceptualMetric::from_name(ev_backend, ev_weights);
    LoadOptions opts;
    opts.split_seed = ck.metadata.contains("config") ? ck.metadata["config"].value("seed", uint64_t{0}) : 0;
    auto ds = load_dataset(ev_data, ev_data / "landmarks.jsonl", opts);
    require_resolution(*bundle, ds.resolution(), ds.resolution());
    auto result = evaluate_model(*bundle, ds, ev_split, metric);
    result.metadata["checkpoint_sha256"] = file_sha256(ev_ck);
    result.metadata["config_digest"] = ck.metadata.value("config_digest", "");
    write_json(to_json(result), ev_out);
    if (!ev_scatter.empty()) write_scatter_csv(result.latent, ev_scatter);
    if (!ev_moments.empty()) write_moments_csv(result.latent, ev_moments);
    std::cout << "background msssim " << result.background.mean_msssim << " perceptual "
              << result.background.mean_perceptual << " | eyes msssim " << result.identity.mean_msssim
              << " perceptual " << result.identity.mean_perceptual << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const c10::Error& e) {
    std::cerr << "error[" << to_string(ErrorKind::Backend) << "]: " << e.what_without_backtrace() << '\n';
    return exit_code(ErrorKind::Backend);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error[" << to_string(ErrorKind::Data) << "]: " << e.what() << '\n';
    return exit_code(ErrorKind::Data);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error[" << to_string(ErrorKind::Io) << "]: " << e.what() << '\n';
    return exit_code(ErrorKind::Io);
  }
}
