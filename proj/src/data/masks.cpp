#include "gazegan/data/masks.hpp"

#include "gazegan/error.hpp"

#include <algorithm>
#include <cmath>

namespace gazegan {

namespace F = torch::nn::functional;

MaskGeometry MaskGeometry::for_resolution(int64_t image_height, int64_t image_width) {
  // 30x50 at 256x256.
  MaskGeometry g;
  g.height = static_cast<int>(std::floor(30.0 * static_cast<double>(image_height) / 256.0 + 0.5));
  g.width = static_cast<int>(std::floor(50.0 * static_cast<double>(image_width) / 256.0 + 0.5));
  g.height = std::max(g.height, 1);
  g.width = std::max(g.width, 1);
  return g;
}

Point eye_center(std::span<const Point> landmarks, int first_index) {
  if (static_cast<int>(landmarks.size()) < kLandmarkCount) {
    throw Error(ErrorKind::Data, "malformed landmarks: expected " + std::to_string(kLandmarkCount) +
                                     " points, got " + std::to_string(landmarks.size()));
  }
  Point c;
  for (int i = first_index; i < first_index + kEyePointCount; ++i) {
    c.x += landmarks[i].x;
    c.y += landmarks[i].y;
  }
  c.x /= kEyePointCount;
  c.y /= kEyePointCount;
  return c;
}

Rect place_rect(Point center, MaskGeometry geometry, int64_t image_height, int64_t image_width) {
  if (geometry.height > image_height || geometry.width > image_width) {
    throw Error(ErrorKind::Shape, "mask geometry larger than image");
  }
  // floor(v + 0.5) keeps integer translations exact, unlike lround on ties.
  int x0 = static_cast<int>(std::floor(center.x - geometry.width / 2.0 + 0.5));
  int y0 = static_cast<int>(std::floor(center.y - geometry.height / 2.0 + 0.5));
  x0 = std::clamp(x0, 0, static_cast<int>(image_width) - geometry.width);
  y0 = std::clamp(y0, 0, static_cast<int>(image_height) - geometry.height);
  return Rect{x0, y0, geometry.width, geometry.height};
}

torch::Tensor rasterize_mask(const Rect& left, const Rect& right, int64_t image_height,
                             int64_t image_width) {
  auto mask = torch::zeros({1, image_height, image_width});
  for (const Rect& r : {left, right}) {
    if (r.width <= 0 || r.height <= 0) continue;
    mask.index_put_({0, torch::indexing::Slice(r.y0, r.y0 + r.height),
                     torch::indexing::Slice(r.x0, r.x0 + r.width)},
                    1.0);
  }
  return mask;
}

MaskSpec compute_eye_masks(std::span<const Point> landmarks, int64_t image_height,
                           int64_t image_width) {
  return compute_eye_masks(landmarks, image_height, image_width,
                           MaskGeometry::for_resolution(image_height, image_width));
}

MaskSpec compute_eye_masks(std::span<const Point> landmarks, int64_t image_height,
                           int64_t image_width, MaskGeometry geometry) {
  MaskSpec spec;
  spec.left = place_rect(eye_center(landmarks, kLeftEyeBegin), geometry, image_height, image_width);
  spec.right = place_rect(eye_center(landmarks, kRightEyeBegin), geometry, image_height, image_width);
  spec.mask = rasterize_mask(spec.left, spec.right, image_height, image_width);
  return spec;
}

torch::Tensor apply_mask(const torch::Tensor& image, const torch::Tensor& mask) {
  const int64_t channel_dim = image.dim() - 3;
  if ((image.dim() != 3 && image.dim() != 4) || mask.dim() != image.dim() ||
      image.size(channel_dim) != 3 || mask.size(channel_dim) != 1 ||
      image.size(-1) != mask.size(-1) || image.size(-2) != mask.size(-2) ||
      (image.dim() == 4 && image.size(0) != mask.size(0))) {
    throw Error(ErrorKind::Shape, "apply_mask: image and mask shapes do not match");
  }
  auto m = mask.to(image.scalar_type());
  auto erased = torch::where(m > 0.5, torch::zeros_like(image), image);
  return torch::cat({erased, m}, channel_dim);
}

torch::Tensor composite(const torch::Tensor& generated, const torch::Tensor& input,
                        const torch::Tensor& mask) {
  if (generated.sizes() != input.sizes()) {
    throw Error(ErrorKind::Shape, "composite: generated and input shapes differ");
  }
  return torch::where(mask.to(input.device()) > 0.5, generated, input);
}

torch::Tensor resize_bilinear(const torch::Tensor& image, int64_t out_height, int64_t out_width) {
  auto out = F::interpolate(image.unsqueeze(0),
                            F::InterpolateFuncOptions()
                                .size(std::vector<int64_t>{out_height, out_width})
                                .mode(torch::kBilinear)
                                .align_corners(true));
  return out.squeeze(0);
}

torch::Tensor extract_eye_composite(const torch::Tensor& image, const MaskSpec& spec) {
  using torch::indexing::Slice;
  if (image.dim() != 3) {
    throw Error(ErrorKind::Shape, "extract_eye_composite: expected (C,H,W)");
  }
  const int64_t h = image.size(1);
  const int64_t w = image.size(2);
  if (h % 2 != 0 || w % 4 != 0) {
    throw Error(ErrorKind::Shape, "extract_eye_composite: H must be even and W divisible by 4");
  }
  auto crop = [&](const Rect& r) {
    if (r.x0 < 0 || r.y0 < 0 || r.x0 + r.width > w || r.y0 + r.height > h || r.width < 1 ||
        r.height < 1) {
      throw Error(ErrorKind::Shape, "extract_eye_composite: rect outside image");
    }
    auto patch = image.index({Slice(), Slice(r.y0, r.y0 + r.height), Slice(r.x0, r.x0 + r.width)});
    return resize_bilinear(patch, h / 2, w / 4);
  };
  return torch::cat({crop(spec.left), crop(spec.right)}, 2);
}

torch::Tensor extract_eye_composites(const torch::Tensor& images, std::span<const MaskSpec> specs) {
  if (images.dim() != 4 || images.size(0) != static_cast<int64_t>(specs.size())) {
    throw Error(ErrorKind::Shape, "extract_eye_composites: batch size and spec count differ");
  }
  std::vector<torch::Tensor> parts;
  parts.reserve(specs.size());
  for (size_t i = 0; i < specs.size(); ++i) {
    parts.push_back(extract_eye_composite(images[static_cast<int64_t>(i)], specs[i]));
  }
  return torch::stack(parts);
}

torch::Tensor hflip(const torch::Tensor& image) {
  return image.flip({-1});
}

}  // namespace gazegan
