#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gazegan {

/// X: eyes staring at the camera. Y: eyes looking elsewhere.
enum class Domain { X, Y };

std::string_view to_string(Domain domain);
Domain domain_from_string(std::string_view text);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr int kLandmarkCount = 68;

/// Integer rectangle covering columns [x0, x0+width) and rows [y0, y0+height).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool contains(int x, int y) const {
    return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// A face image tagged with its domain. `pixels` is a (3,H,W) float tensor with
/// values in [-1,1]; landmarks follow the 68-point convention in pixel
/// coordinates (pixel centers at integer positions).
struct ImageSample {
  std::string id;
  Domain domain = Domain::X;
  torch::Tensor pixels;
  std::vector<Point> landmarks;

  int64_t height() const { return pixels.size(1); }
  int64_t width() const { return pixels.size(2); }
};

/// Throws Error(Data) when the sample violates the ImageSample invariants.
void validate_sample(const ImageSample& sample);

}  // namespace gazegan
