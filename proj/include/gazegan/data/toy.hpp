#pragma once

#include "gazegan/data/dataset.hpp"

#include <optional>

namespace gazegan {

/// Procedural face generator used as a desk-scale stand-in for a real face
/// dataset. Every face is an ellipse head with two almond eyes; the iris
/// offset inside each eye encodes gaze. Domain X irises are centered, domain Y
/// irises are displaced by a seeded vector drawn uniformly from a disc.
struct ToyOptions {
  int resolution = 64;
  /// Radius of the gaze-offset disc in pixels; <= 0 selects 2.5 px per 64 px.
  double max_gaze_offset = 0.0;
  /// Held-out counts; < 0 selects max(1, n/5).
  int n_test_x = -1;
  int n_test_y = -1;
};

struct ToyFaceParams {
  int resolution = 64;
  Point head_center;
  double head_rx = 0.0, head_ry = 0.0;
  Point eye_centers[2];
  double eye_rx = 0.0, eye_ry = 0.0;
  double iris_radius = 0.0;
  Point gaze_offset;
  uint8_t background[3] = {0, 0, 0};
  uint8_t skin[3] = {0, 0, 0};
  uint8_t iris[3] = {0, 0, 0};
};

/// Per-sample RNG: mt19937_64 seeded with seed_seq{seed_lo, seed_hi, domain, index}.
ToyFaceParams toy_face_params(uint64_t seed, Domain domain, int index, const ToyOptions& options = {});

/// Gaze offset of a domain-Y sample: radius R*sqrt(u1), angle 2*pi*u2, where
/// (u1, u2) are the first two canonical doubles of a mt19937_64 seeded with
/// seed_seq{seed_lo, seed_hi, 0x6761, index}.
Point toy_gaze_offset(uint64_t seed, int index, double radius);

std::string toy_sample_id(Domain domain, int index);

ImageSample render_toy_face(const ToyFaceParams& params, const std::string& id, Domain domain);

/// n_x domain-X and n_y domain-Y faces plus a seeded split. Bit-identical for
/// equal arguments.
Dataset generate_toy_dataset(int n_x, int n_y, uint64_t seed, const ToyOptions& options = {});

/// Darkness-weighted iris centroid inside each eye rect, relative to the eye
/// center from the landmarks, averaged over both eyes. Weight per pixel is
/// max(0, 0.45 - luminance) with luminance in [0,1]. nullopt when no pixel
/// is dark enough.
std::optional<Point> estimate_gaze_offset(const torch::Tensor& image, const MaskSpec& spec,
                                          std::span<const Point> landmarks);

}  // namespace gazegan
