#include "gazegan/eval/report.hpp"

#include "gazegan/error.hpp"
#include "gazegan/model/gam.hpp"
#include "gazegan/model/pam.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace gazegan {

void MetricReport::add(PairScore score) {
  pairs.push_back(std::move(score));
  double m = 0.0, p = 0.0;
  for (const auto& s : pairs) {
    m += s.msssim;
    p += s.perceptual;
  }
  mean_msssim = m / pairs.size();
  mean_perceptual = p / pairs.size();
}

namespace {

void check_pairs(const torch::Tensor& inputs, const torch::Tensor& outputs, std::span<const MaskSpec> specs) {
  if (inputs.sizes() != outputs.sizes() || inputs.dim() != 4 ||
      static_cast<size_t>(inputs.size(0)) != specs.size()) {
    throw Error(ErrorKind::Shape, "evaluation inputs, outputs and masks do not line up");
  }
}

std::string pair_id(std::span<const std::string> ids, size_t i) {
  return i < ids.size() ? ids[i] : std::to_string(i);
}

MetricReport score_pairs(const std::string& region, const std::vector<torch::Tensor>& a,
                         const std::vector<torch::Tensor>& b, const PerceptualMetric& metric,
                         std::span<const std::string> ids) {
  MetricReport report;
  report.region = region;
  report.backend = metric.name();
  for (size_t i = 0; i < a.size(); ++i) {
    report.add({pair_id(ids, i), msssim(a[i], b[i]), metric(a[i], b[i])});
  }
  return report;
}

torch::Tensor erase_eyes(const torch::Tensor& image, const torch::Tensor& mask) {
  return torch::where(mask > 0.5, torch::zeros_like(image), image);
}

}  // namespace

MetricReport background_preservation(const torch::Tensor& inputs, const torch::Tensor& outputs,
                                     std::span<const MaskSpec> specs, const PerceptualMetric& metric,
                                     std::span<const std::string> ids) {
  check_pairs(inputs, outputs, specs);
  std::vector<torch::Tensor> a, b;
  for (size_t i = 0; i < specs.size(); ++i) {
    auto mask = specs[i].mask.to(inputs.device());
    a.push_back(erase_eyes(inputs[i], mask));
    b.push_back(erase_eyes(outputs[i], mask));
  }
  return score_pairs("background", a, b, metric, ids);
}

MetricReport identity_preservation(const torch::Tensor& inputs, const torch::Tensor& outputs,
                                   std::span<const MaskSpec> specs, const PerceptualMetric& metric,
                                   std::span<const std::string> ids) {
  check_pairs(inputs, outputs, specs);
  std::vector<torch::Tensor> a, b;
  for (size_t i = 0; i < specs.size(); ++i) {
    a.push_back(extract_eye_composite(inputs[i], specs[i]));
    b.push_back(extract_eye_composite(outputs[i], specs[i]));
  }
  return score_pairs("eyes", a, b, metric, ids);
}

Moments moments(std::span<const double> values) {
  Moments m;
  if (values.empty()) return m;
  double mean = 0.0, m2 = 0.0;
  size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - mean;
    mean += delta / n;
    m2 += delta * (v - mean);
  }
  m.mean = mean;
  m.variance = m2 / n;
  return m;
}

namespace {

template <typename Fn>
void for_chunks(const Dataset& dataset, std::span<const std::string> ids, int chunk, torch::ScalarType dtype, Fn fn) {
  for (size_t begin = 0; begin < ids.size(); begin += chunk) {
    const size_t end = std::min(ids.size(), begin + static_cast<size_t>(chunk));
    fn(make_batch(dataset, ids.subspan(begin, end - begin)).to(dtype));
  }
}

void append_points(LatentStats& stats, const std::string& group, const Batch& batch, const AngleCode& r) {
  auto rd = r.value.to(torch::kFloat64).contiguous();
  for (int64_t i = 0; i < batch.size(); ++i) {
    stats.points.push_back({group, batch.ids[i], rd[i][0].item<double>(), rd[i][1].item<double>()});
  }
}

}  // namespace

LatentStats latent_stats(NetworkBundle& bundle, const Dataset& dataset, std::span<const std::string> ids_x,
                         std::span<const std::string> ids_y, int chunk) {
  torch::NoGradGuard guard;
  LatentStats stats;
  const auto dtype = bundle.dtype();
  auto angle = [&](const torch::Tensor& images, const Batch& b) {
    return bundle.er->forward(extract_eye_composites(images, b.specs));
  };
  for_chunks(dataset, ids_x, chunk, dtype, [&](const Batch& b) { append_points(stats, "x", b, angle(b.images, b)); });
  std::vector<AnglePoint> corrected;
  for_chunks(dataset, ids_y, chunk, dtype, [&](const Batch& b) {
    append_points(stats, "y", b, angle(b.images, b));
    auto fixed = correct_gaze(bundle, b);
    LatentStats tmp;
    append_points(tmp, "corrected", b, angle(fixed, b));
    corrected.insert(corrected.end(), tmp.points.begin(), tmp.points.end());

    auto rec = gy_reconstruct(bundle, b.images, b);
    auto y_tilde = composite(rec.output, b.images, b.masks);
    auto c_y = extract_content(bundle, extract_eye_composites(b.images, b.specs)).value;
    auto c_t = extract_content(bundle, extract_eye_composites(y_tilde, b.specs)).value;
    auto diff = (c_t - c_y).to(torch::kFloat64).contiguous();
    for (int64_t i = 0; i < b.size(); ++i) {
      auto row = diff[i];
      std::span<const double> values(row.data_ptr<double>(), static_cast<size_t>(row.numel()));
      stats.content.push_back({b.ids[i], moments(values)});
    }
  });
  stats.points.insert(stats.points.end(), corrected.begin(), corrected.end());
  return stats;
}

double mean_distance_to_centroid(const LatentStats& stats, const std::string& group,
                                 const std::string& reference_group) {
  double cx = 0.0, cy = 0.0;
  size_t n_ref = 0;
  for (const auto& p : stats.points) {
    if (p.group != reference_group) continue;
    cx += p.r0;
    cy += p.r1;
    ++n_ref;
  }
  if (n_ref == 0) throw Error(ErrorKind::Data, "no points in group " + reference_group);
  cx /= n_ref;
  cy /= n_ref;
  double total = 0.0;
  size_t n = 0;
  for (const auto& p : stats.points) {
    if (p.group != group) continue;
    total += std::hypot(p.r0 - cx, p.r1 - cy);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::Data, "no points in group " + group);
  return total / n;
}

EvaluationResult evaluate_model(NetworkBundle& bundle, const Dataset& dataset, const std::string& partition,
                                const PerceptualMetric& metric, int chunk) {
  const auto& split = dataset.split();
  std::span<const std::string> ids_x, ids_y;
  if (partition == "test") {
    ids_x = split.test_x;
    ids_y = split.test_y;
  } else if (partition == "train") {
    ids_x = split.train_x;
    ids_y = split.train_y;
  } else {
    throw Error(ErrorKind::Usage, "unknown split '" + partition + "' (expected test or train)");
  }
  if (ids_y.empty()) throw Error(ErrorKind::Data, "split '" + partition + "' has no domain-Y samples");

  torch::NoGradGuard guard;
  EvaluationResult result;
  result.background.region = "background";
  result.background.backend = metric.name();
  result.identity.region = "eyes";
  result.identity.backend = metric.name();
  const auto dtype = bundle.dtype();
  for_chunks(dataset, ids_y, chunk, dtype, [&](const Batch& b) {
    auto r = background_preservation(b.images, correct_gaze(bundle, b), b.specs, metric, b.ids);
    for (auto& p : r.pairs) result.background.add(p);
  });
  for_chunks(dataset, ids_x, chunk, dtype, [&](const Batch& b) {
    auto r = identity_preservation(b.images, correct_gaze(bundle, b), b.specs, metric, b.ids);
    for (auto& p : r.pairs) result.identity.add(p);
  });
  result.latent = latent_stats(bundle, dataset, ids_x, ids_y, chunk);
  result.metadata["split"] = partition;
  result.metadata["backend"] = metric.name();
  return result;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : report.pairs) rows.push_back({{"id", p.id}, {"msssim", p.msssim}, {"perceptual", p.perceptual}});
  return {{"region", report.region},
          {"backend", report.backend},
          {"count", report.count()},
          {"mean_msssim", report.mean_msssim},
          {"mean_perceptual", report.mean_perceptual},
          {"pairs", rows}};
}

nlohmann::json to_json(const EvaluationResult& result) {
  nlohmann::json j;
  j["metadata"] = result.metadata;
  j["background"] = to_json(result.background);
  j["identity"] = to_json(result.identity);
  double mean = 0.0, var = 0.0;
  for (const auto& c : result.latent.content) {
    mean += c.moments.mean;
    var += c.moments.variance;
  }
  const auto n = std::max<size_t>(1, result.latent.content.size());
  j["content_difference"] = {{"mean", mean / n}, {"variance", var / n}, {"count", result.latent.content.size()}};
  return j;
}

namespace {
std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}
}  // namespace

void write_scatter_csv(const LatentStats& stats, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "group,id,r0,r1\n";
  for (const auto& p : stats.points) out << p.group << ',' << p.id << ',' << p.r0 << ',' << p.r1 << '\n';
}

void write_moments_csv(const LatentStats& stats, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "id,mean,variance\n";
  for (const auto& c : stats.content) out << c.id << ',' << c.moments.mean << ',' << c.moments.variance << '\n';
}

}  // namespace gazegan
