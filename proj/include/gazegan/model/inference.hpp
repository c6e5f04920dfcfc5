#pragma once

#include "gazegan/model/gcm.hpp"

#include <filesystem>

namespace gazegan {

/// (1 - t) r_a + t r_b. t outside [0,1] extrapolates.
AngleCode interpolate_angle(const AngleCode& r_a, const AngleCode& r_b, double t);

/// `frames` evenly spaced values from t_min to t_max inclusive. One frame
/// yields {t_min}.
std::vector<double> sweep_values(int frames = 7, double t_min = 0.0, double t_max = 1.0);

/// One composited frame per t, decoded by G_y at the angle code interpolated
/// between the input's and its gaze-corrected version's. The content code is
/// taken once from the input and held fixed. Throws Error(Usage) when
/// `t_values` is empty.
std::vector<torch::Tensor> animate(NetworkBundle& bundle, const ImageSample& y, std::span<const double> t_values);

/// Writes frames left to right as one PNG.
void emit_grid(std::span<const torch::Tensor> frames, const std::filesystem::path& path);

}  // namespace gazegan
