#pragma once

#include <torch/torch.h>

#include <array>
#include <filesystem>
#include <memory>
#include <string>

namespace gazegan {

/// Multi-scale SSIM constants. Images are compared in [0,1] (dynamic range 1).
struct MsssimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double sigma = 1.5;
  std::array<double, 5> weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
};

/// Number of scales used for an image: levels of repeated 2x2 average pooling
/// whose smaller side is still >= the window, capped at 5. The weights of the
/// used levels are renormalized to sum to 1.
int msssim_levels(int64_t height, int64_t width, const MsssimParams& params = {});

/// MS-SSIM of two (C,H,W) images in [-1,1], averaged over channels. Filtering
/// uses the valid region only; negative contrast-structure and luminance
/// terms are clamped to 0 before exponentiation.
double msssim(const torch::Tensor& a, const torch::Tensor& b, const MsssimParams& params = {});

/// Builtin perceptual proxy on (C,H,W) images in [-1,1]: over up to three
/// scales (2x2 average pooling between scales), the sum of mean squared
/// differences of intensity, horizontal and vertical forward differences,
/// all computed in [0,1].
double proxy_distance(const torch::Tensor& a, const torch::Tensor& b);

/// Pluggable perceptual distance. The external backend is a TorchScript
/// module whose forward(a, b) takes (1,3,H,W) images in [-1,1] and returns a
/// distance; it is symmetrized as (d(a,b) + d(b,a)) / 2.
class PerceptualMetric {
 public:
  static PerceptualMetric proxy();
  /// Throws Error(Backend) when the file is missing or unloadable.
  static PerceptualMetric torchscript(const std::filesystem::path& weights);
  /// "proxy" or "torchscript"; the CLI uses these names.
  static PerceptualMetric from_name(const std::string& name, const std::filesystem::path& weights);

  double operator()(const torch::Tensor& a, const torch::Tensor& b) const;
  const std::string& name() const { return name_; }

 private:
  struct Script;
  std::string name_;
  std::shared_ptr<Script> script_;
};

}  // namespace gazegan
