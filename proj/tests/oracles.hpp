#pragma once

// Independent reference implementations shared by the unit and acceptance
// tests. Deliberately naive: nested loops, no shared code with the library.

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace testing {

using Grid = std::vector<std::vector<double>>;

inline Grid channel01(const torch::Tensor& img, int c) {
  auto t = ((img[c].to(torch::kFloat64) + 1) / 2).contiguous();
  Grid g(t.size(0), std::vector<double>(t.size(1)));
  for (int64_t y = 0; y < t.size(0); ++y)
    for (int64_t x = 0; x < t.size(1); ++x) g[y][x] = t[y][x].item<double>();
  return g;
}

inline Grid halve(const Grid& g) {
  Grid o(g.size() / 2, std::vector<double>(g[0].size() / 2));
  for (size_t y = 0; y < o.size(); ++y)
    for (size_t x = 0; x < o[0].size(); ++x)
      o[y][x] = (g[2 * y][2 * x] + g[2 * y][2 * x + 1] + g[2 * y + 1][2 * x] + g[2 * y + 1][2 * x + 1]) / 4;
  return o;
}

// Direct SSIM statistics with a full 2D Gaussian window at every valid
// position.
inline std::pair<double, double> direct_terms(const Grid& a, const Grid& b) {
  double w[11][11], s = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) s += w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double l = 0, cs = 0;
  int n = 0;
  for (size_t y = 0; y + 11 <= a.size(); ++y)
    for (size_t x = 0; x + 11 <= a[0].size(); ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double k = w[i][j] / s, p = a[y + i][x + j], q = b[y + i][x + j];
          ma += k * p;
          mb += k * q;
          saa += k * p * p;
          sbb += k * q * q;
          sab += k * p * q;
        }
      saa -= ma * ma;
      sbb -= mb * mb;
      sab -= ma * mb;
      l += (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      cs += (2 * sab + c2) / (saa + sbb + c2);
      ++n;
    }
  return {l / n, cs / n};
}

inline double oracle_msssim(const torch::Tensor& a, const torch::Tensor& b) {
  const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double total = 0;
  for (int c = 0; c < a.size(0); ++c) {
    Grid ga = channel01(a, c), gb = channel01(b, c);
    std::vector<std::pair<double, double>> terms;
    while (terms.size() < 5 && std::min(ga.size(), ga[0].size()) >= 11) {
      terms.push_back(direct_terms(ga, gb));
      ga = halve(ga);
      gb = halve(gb);
    }
    double wsum = 0;
    for (size_t j = 0; j < terms.size(); ++j) wsum += weights[j];
    double score = 1;
    for (size_t j = 0; j < terms.size(); ++j) {
      double v = std::max(terms[j].second, 0.0);
      if (j + 1 == terms.size()) v *= std::max(terms[j].first, 0.0);
      score *= std::pow(v, weights[j] / wsum);
    }
    total += score;
  }
  return total / a.size(0);
}

inline std::vector<double> flat(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kFloat64).contiguous();
  return {c.data_ptr<double>(), c.data_ptr<double>() + c.numel()};
}

// Mean absolute difference.
inline double oracle_l1(const torch::Tensor& a, const torch::Tensor& b) {
  auto x = flat(a), y = flat(b);
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += std::fabs(x[i] - y[i]);
  return s / x.size();
}

// Mean of log D (real) or log(1 - D) (fake), D = 1 / (1 + exp(-logit)),
// probabilities floored at 1e-8.
inline double oracle_log_d(const torch::Tensor& logits, bool real) {
  double s = 0.0;
  auto l = flat(logits);
  for (double v : l) {
    const double d = 1.0 / (1.0 + std::exp(-v));
    s += std::log(std::max(real ? d : 1.0 - d, 1e-8));
  }
  return s / l.size();
}

}  // namespace testing
