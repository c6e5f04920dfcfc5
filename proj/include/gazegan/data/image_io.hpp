#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <span>

namespace gazegan {

/// Reads an 8-bit PNG/JPEG as a (3,H,W) float tensor in [-1,1].
torch::Tensor read_image(const std::filesystem::path& path);

/// Writes a (3,H,W) tensor in [-1,1] as an 8-bit RGB PNG.
void write_image(const torch::Tensor& image, const std::filesystem::path& path);

/// 8-bit quantization used by write_image: round((v+1)*127.5), clamped.
torch::Tensor to_uint8_hwc(const torch::Tensor& image);
torch::Tensor from_uint8_hwc(const torch::Tensor& hwc);

/// Area-resamples a (3,H,W) image to (3,height,width).
torch::Tensor resize_area(const torch::Tensor& image, int64_t height, int64_t width);

/// Horizontal strip [f0 | f1 | ...] of equally sized (3,H,W) frames.
torch::Tensor make_strip(std::span<const torch::Tensor> frames);

}  // namespace gazegan
