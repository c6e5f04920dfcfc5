#include "gazegan/eval/metrics.hpp"

#include "gazegan/error.hpp"

#include <torch/script.h>

#include <cmath>
#include <vector>

namespace gazegan {

namespace {

// Row-major single-channel plane.
struct Plane {
  int64_t h = 0, w = 0;
  std::vector<double> v;
  double at(int64_t y, int64_t x) const { return v[y * w + x]; }
};

std::vector<Plane> to_planes(const torch::Tensor& image) {
  if (image.dim() != 3) throw Error(ErrorKind::Shape, "metrics expect (C,H,W) images");
  auto t = ((image.to(torch::kFloat64) + 1.0) * 0.5).contiguous();
  std::vector<Plane> planes;
  const auto* p = t.data_ptr<double>();
  const int64_t h = t.size(1), w = t.size(2);
  for (int64_t c = 0; c < t.size(0); ++c) {
    planes.push_back({h, w, std::vector<double>(p + c * h * w, p + (c + 1) * h * w)});
  }
  return planes;
}

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw Error(ErrorKind::Shape, "metric inputs differ in shape");
}

Plane pool2(const Plane& in) {
  Plane out{in.h / 2, in.w / 2, {}};
  out.v.resize(out.h * out.w);
  for (int64_t y = 0; y < out.h; ++y) {
    for (int64_t x = 0; x < out.w; ++x) {
      out.v[y * out.w + x] = 0.25 * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) +
                                     in.at(2 * y + 1, 2 * x) + in.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> g(size);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - (size - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (auto& x : g) x /= sum;
  return g;
}

// Separable valid-mode filter.
Plane filter_valid(const Plane& in, const std::vector<double>& g) {
  const int64_t k = static_cast<int64_t>(g.size());
  Plane rows{in.h, in.w - k + 1, {}};
  rows.v.assign(rows.h * rows.w, 0.0);
  for (int64_t y = 0; y < rows.h; ++y)
    for (int64_t x = 0; x < rows.w; ++x) {
      double s = 0.0;
      for (int64_t i = 0; i < k; ++i) s += g[i] * in.at(y, x + i);
      rows.v[y * rows.w + x] = s;
    }
  Plane out{in.h - k + 1, rows.w, {}};
  out.v.assign(out.h * out.w, 0.0);
  for (int64_t y = 0; y < out.h; ++y)
    for (int64_t x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int64_t i = 0; i < k; ++i) s += g[i] * rows.at(y + i, x);
      out.v[y * out.w + x] = s;
    }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

// Mean luminance and contrast-structure terms at one scale.
std::pair<double, double> ssim_terms(const Plane& a, const Plane& b, const std::vector<double>& g,
                                     double c1, double c2) {
  auto mu_a = filter_valid(a, g), mu_b = filter_valid(b, g);
  auto e_aa = filter_valid(product(a, a), g);
  auto e_bb = filter_valid(product(b, b), g);
  auto e_ab = filter_valid(product(a, b), g);
  double l_sum = 0.0, cs_sum = 0.0;
  const size_t n = mu_a.v.size();
  for (size_t i = 0; i < n; ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = e_aa.v[i] - ma * ma, vb = e_bb.v[i] - mb * mb, cov = e_ab.v[i] - ma * mb;
    l_sum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    cs_sum += (2.0 * cov + c2) / (va + vb + c2);
  }
  return {l_sum / n, cs_sum / n};
}

std::vector<Plane> pooled(const std::vector<Plane>& planes) {
  std::vector<Plane> out;
  for (const auto& p : planes) out.push_back(pool2(p));
  return out;
}

}  // namespace

int msssim_levels(int64_t height, int64_t width, const MsssimParams& params) {
  int levels = 0;
  while (levels < static_cast<int>(params.weights.size()) && std::min(height, width) >= params.window) {
    ++levels;
    height /= 2;
    width /= 2;
  }
  return levels;
}

double msssim(const torch::Tensor& a, const torch::Tensor& b, const MsssimParams& params) {
  require_same_shape(a, b);
  auto pa = to_planes(a), pb = to_planes(b);
  const int levels = msssim_levels(pa[0].h, pa[0].w, params);
  if (levels == 0) throw Error(ErrorKind::Shape, "image smaller than the MS-SSIM window");
  double wsum = 0.0;
  for (int j = 0; j < levels; ++j) wsum += params.weights[j];
  const auto g = gaussian_taps(params.window, params.sigma);
  const double c1 = params.k1 * params.k1, c2 = params.k2 * params.k2;

  std::vector<double> score(pa.size(), 1.0);
  for (int j = 0; j < levels; ++j) {
    if (j > 0) {
      pa = pooled(pa);
      pb = pooled(pb);
    }
    const double w = params.weights[j] / wsum;
    for (size_t c = 0; c < pa.size(); ++c) {
      auto [l, cs] = ssim_terms(pa[c], pb[c], g, c1, c2);
      double term = std::max(cs, 0.0);
      if (j == levels - 1) term *= std::max(l, 0.0);
      score[c] *= std::pow(term, w);
    }
  }
  double mean = 0.0;
  for (double s : score) mean += s;
  return mean / static_cast<double>(score.size());
}

double proxy_distance(const torch::Tensor& a, const torch::Tensor& b) {
  require_same_shape(a, b);
  auto pa = to_planes(a), pb = to_planes(b);
  double total = 0.0;
  for (int scale = 0; scale < 3; ++scale) {
    if (scale > 0) {
      if (pa[0].h < 4 || pa[0].w < 4) break;
      pa = pooled(pa);
      pb = pooled(pb);
    }
    double se_i = 0.0, se_x = 0.0, se_y = 0.0;
    int64_t n_i = 0, n_x = 0, n_y = 0;
    for (size_t c = 0; c < pa.size(); ++c) {
      const auto &A = pa[c], &B = pb[c];
      for (int64_t y = 0; y < A.h; ++y)
        for (int64_t x = 0; x < A.w; ++x) {
          const double d = A.at(y, x) - B.at(y, x);
          se_i += d * d;
          ++n_i;
          if (x + 1 < A.w) {
            const double dx = (A.at(y, x + 1) - A.at(y, x)) - (B.at(y, x + 1) - B.at(y, x));
            se_x += dx * dx;
            ++n_x;
          }
          if (y + 1 < A.h) {
            const double dy = (A.at(y + 1, x) - A.at(y, x)) - (B.at(y + 1, x) - B.at(y, x));
            se_y += dy * dy;
            ++n_y;
          }
        }
    }
    total += se_i / n_i;
    if (n_x > 0) total += se_x / n_x;
    if (n_y > 0) total += se_y / n_y;
  }
  return total;
}

struct PerceptualMetric::Script {
  mutable torch::jit::script::Module module;
};

PerceptualMetric PerceptualMetric::proxy() {
  PerceptualMetric m;
  m.name_ = "proxy";
  return m;
}

PerceptualMetric PerceptualMetric::torchscript(const std::filesystem::path& weights) {
  if (!std::filesystem::exists(weights)) {
    throw Error(ErrorKind::Backend, "perceptual weights not found: " + weights.string());
  }
  PerceptualMetric m;
  m.name_ = "torchscript";
  m.script_ = std::make_shared<Script>();
  try {
    m.script_->module = torch::jit::load(weights.string());
  } catch (const c10::Error& e) {
    throw Error(ErrorKind::Backend, "cannot load perceptual weights " + weights.string() + ": " + e.what_without_backtrace());
  }
  m.script_->module.eval();
  return m;
}

PerceptualMetric PerceptualMetric::from_name(const std::string& name, const std::filesystem::path& weights) {
  if (name == "proxy") return proxy();
  if (name == "torchscript") {
    if (weights.empty()) throw Error(ErrorKind::Backend, "the torchscript backend needs a weights file");
    return torchscript(weights);
  }
  throw Error(ErrorKind::Usage, "unknown perceptual backend: " + name);
}

double PerceptualMetric::operator()(const torch::Tensor& a, const torch::Tensor& b) const {
  require_same_shape(a, b);
  if (!script_) return proxy_distance(a, b);
  if (torch::equal(a, b)) return 0.0;
  torch::NoGradGuard guard;
  auto ta = a.to(torch::kFloat32).unsqueeze(0), tb = b.to(torch::kFloat32).unsqueeze(0);
  try {
    const double ab = script_->module.forward({ta, tb}).toTensor().sum().item<double>();
    const double ba = script_->module.forward({tb, ta}).toTensor().sum().item<double>();
    return std::max(0.0, 0.5 * (ab + ba));
  } catch (const c10::Error& e) {
    throw Error(ErrorKind::Backend, std::string("perceptual backend failed: ") + e.what_without_backtrace());
  }
}

}  // namespace gazegan
