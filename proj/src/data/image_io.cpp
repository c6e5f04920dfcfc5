#include "gazegan/data/image_io.hpp"

#include "gazegan/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace gazegan {

torch::Tensor from_uint8_hwc(const torch::Tensor& hwc) {
  return hwc.permute({2, 0, 1}).to(torch::kFloat32).div(127.5).sub(1.0).contiguous();
}

torch::Tensor to_uint8_hwc(const torch::Tensor& image) {
  if (image.dim() != 3 || image.size(0) != 3) {
    throw Error(ErrorKind::Shape, "expected a (3,H,W) image");
  }
  auto v = image.detach().to(torch::kCPU, torch::kFloat64);
  v = ((v + 1.0) * 127.5).round().clamp(0.0, 255.0).to(torch::kUInt8);
  return v.permute({1, 2, 0}).contiguous();
}

torch::Tensor read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw Error(ErrorKind::Io, "cannot read image '" + path.string() + "'");
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  auto hwc = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, 3}, torch::kUInt8).clone();
  return from_uint8_hwc(hwc);
}

void write_image(const torch::Tensor& image, const std::filesystem::path& path) {
  auto hwc = to_uint8_hwc(image);
  cv::Mat rgb(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC3,
              hwc.data_ptr<uint8_t>());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw Error(ErrorKind::Io, "cannot write image '" + path.string() + "'");
  }
}

torch::Tensor resize_area(const torch::Tensor& image, int64_t height, int64_t width) {
  auto hwc = image.detach().to(torch::kFloat32).permute({1, 2, 0}).contiguous();
  cv::Mat src(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_32FC3,
              hwc.data_ptr<float>());
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(static_cast<int>(width), static_cast<int>(height)), 0, 0,
             cv::INTER_AREA);
  auto out = torch::from_blob(dst.data, {height, width, 3}, torch::kFloat32).clone();
  return out.permute({2, 0, 1}).clamp(-1.0, 1.0).contiguous();
}

torch::Tensor make_strip(std::span<const torch::Tensor> frames) {
  if (frames.empty()) {
    throw Error(ErrorKind::Usage, "make_strip: no frames");
  }
  for (const auto& f : frames) {
    if (f.sizes() != frames.front().sizes()) {
      throw Error(ErrorKind::Shape, "make_strip: frames differ in shape");
    }
  }
  return torch::cat(std::vector<torch::Tensor>(frames.begin(), frames.end()), 2);
}

}  // namespace gazegan
