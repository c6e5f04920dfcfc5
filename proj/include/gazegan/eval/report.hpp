#pragma once

#include "gazegan/data/dataset.hpp"
#include "gazegan/eval/metrics.hpp"
#include "gazegan/nets/bundle.hpp"

#include <nlohmann/json.hpp>

namespace gazegan {

struct PairScore {
  std::string id;
  double msssim = 0.0;
  double perceptual = 0.0;
};

/// Per-pair scores with arithmetic-mean aggregates.
struct MetricReport {
  std::string region;   // "background" or "eyes"
  std::string backend;  // perceptual backend name
  std::vector<PairScore> pairs;
  double mean_msssim = 0.0;
  double mean_perceptual = 0.0;

  size_t count() const { return pairs.size(); }
  void add(PairScore score);
};

/// Scores M(input) against M(output): both images with the eye rectangles
/// erased. inputs/outputs are (N,3,H,W).
MetricReport background_preservation(const torch::Tensor& inputs, const torch::Tensor& outputs,
                                     std::span<const MaskSpec> specs, const PerceptualMetric& metric,
                                     std::span<const std::string> ids = {});

/// Scores the eye composites M'(input) against M'(output).
MetricReport identity_preservation(const torch::Tensor& inputs, const torch::Tensor& outputs,
                                   std::span<const MaskSpec> specs, const PerceptualMetric& metric,
                                   std::span<const std::string> ids = {});

/// Mean and population variance.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Moments moments(std::span<const double> values);

struct AnglePoint {
  std::string group;  // "x", "y" or "corrected"
  std::string id;
  double r0 = 0.0;
  double r1 = 0.0;
};

struct ContentMoments {
  std::string id;
  Moments moments;  // over the 256 entries of c(y~) - c(y)
};

struct LatentStats {
  std::vector<AnglePoint> points;
  std::vector<ContentMoments> content;
};

/// Angle codes of the x and y images and of G_x's corrections of the y
/// images, plus per-sample moments of c(y~) - c(y), where y~ is G_y's
/// composited reconstruction of y and c is always the pretrained encoder.
LatentStats latent_stats(NetworkBundle& bundle, const Dataset& dataset, std::span<const std::string> ids_x,
                         std::span<const std::string> ids_y, int chunk = 16);

/// Mean distance of a group's points to the centroid of another group.
double mean_distance_to_centroid(const LatentStats& stats, const std::string& group,
                                 const std::string& reference_group);

struct EvaluationResult {
  MetricReport background;  // corrected y vs y
  MetricReport identity;    // in-painted x vs x
  LatentStats latent;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Runs G_x on the chosen partition ("test" or "train") and scores it.
EvaluationResult evaluate_model(NetworkBundle& bundle, const Dataset& dataset, const std::string& partition,
                                const PerceptualMetric& metric, int chunk = 16);

nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const EvaluationResult& result);
void write_scatter_csv(const LatentStats& stats, const std::filesystem::path& path);
void write_moments_csv(const LatentStats& stats, const std::filesystem::path& path);

}  // namespace gazegan
