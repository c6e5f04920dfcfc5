#pragma once

#include "gazegan/data/sample.hpp"

#include <span>

namespace gazegan {

/// Size of each per-eye rectangle. The canonical 256x256 setting uses 30x50;
/// other resolutions scale it proportionally.
struct MaskGeometry {
  int height = 30;
  int width = 50;

  static MaskGeometry for_resolution(int64_t image_height, int64_t image_width);
};

/// The two eye rectangles plus the binary (1,H,W) mask that is 1 exactly on
/// their union.
struct MaskSpec {
  Rect left;
  Rect right;
  torch::Tensor mask;
};

/// Landmark index ranges of the two eyes (68-point convention).
inline constexpr int kLeftEyeBegin = 36;
inline constexpr int kRightEyeBegin = 42;
inline constexpr int kEyePointCount = 6;

Point eye_center(std::span<const Point> landmarks, int first_index);

/// Places a rect of the given geometry centered on `center`, shifted (never
/// shrunk) to stay inside the image.
Rect place_rect(Point center, MaskGeometry geometry, int64_t image_height, int64_t image_width);

torch::Tensor rasterize_mask(const Rect& left, const Rect& right, int64_t image_height,
                             int64_t image_width);

MaskSpec compute_eye_masks(std::span<const Point> landmarks, int64_t image_height,
                           int64_t image_width);
MaskSpec compute_eye_masks(std::span<const Point> landmarks, int64_t image_height,
                           int64_t image_width, MaskGeometry geometry);

/// M(z): RGB erased to 0 inside the mask, mask appended as a 4th channel.
/// Accepts (3,H,W) with a (1,H,W) mask or (N,3,H,W) with (N,1,H,W).
torch::Tensor apply_mask(const torch::Tensor& image, const torch::Tensor& mask);

/// generated inside the mask, input outside. Selection, not arithmetic, so the
/// outside region is bit-identical to `input`.
torch::Tensor composite(const torch::Tensor& generated, const torch::Tensor& input,
                        const torch::Tensor& mask);

/// M'(z): each eye rect resampled (bilinear, corner-aligned) to (H/2)x(W/4)
/// and concatenated as [left | right] into a (3,H/2,W/2) tensor. Differentiable
/// with respect to `image`.
torch::Tensor extract_eye_composite(const torch::Tensor& image, const MaskSpec& spec);

/// Batched M' over (N,3,H,W) with one spec per item.
torch::Tensor extract_eye_composites(const torch::Tensor& images, std::span<const MaskSpec> specs);

/// Corner-aligned bilinear resize of a (C,h,w) tensor.
torch::Tensor resize_bilinear(const torch::Tensor& image, int64_t out_height, int64_t out_width);

/// F: reverses the width (last) axis.
torch::Tensor hflip(const torch::Tensor& image);

}  // namespace gazegan
