#include "gazegan/model/inference.hpp"

#include "gazegan/data/image_io.hpp"
#include "gazegan/error.hpp"

namespace gazegan {

AngleCode interpolate_angle(const AngleCode& r_a, const AngleCode& r_b, double t) {
  if (t == 0.0) return {r_a.value.clone()};
  if (t == 1.0) return {r_b.value.clone()};
  return {(1.0 - t) * r_a.value + t * r_b.value};
}

std::vector<double> sweep_values(int frames, double t_min, double t_max) {
  if (frames < 1) throw Error(ErrorKind::Usage, "frame count must be at least 1");
  std::vector<double> t(frames, t_min);
  for (int i = 1; i < frames; ++i) {
    t[i] = i == frames - 1 ? t_max : t_min + (t_max - t_min) * i / (frames - 1);
  }
  return t;
}

std::vector<torch::Tensor> animate(NetworkBundle& bundle, const ImageSample& y, std::span<const double> t_values) {
  if (t_values.empty()) throw Error(ErrorKind::Usage, "animate needs at least one t value");
  torch::NoGradGuard guard;
  auto batch = make_batch(y).to(bundle.dtype());
  auto comp = extract_eye_composites(batch.images, batch.specs);
  auto c = bundle.content_code(comp);
  auto r_y = bundle.er->forward(comp);
  auto corrected = correct_gaze(bundle, batch);
  auto r_corr = bundle.er->forward(extract_eye_composites(corrected, batch.specs));
  auto masked = apply_mask(batch.images, batch.masks);

  std::vector<torch::Tensor> frames;
  frames.reserve(t_values.size());
  for (double t : t_values) {
    auto out = bundle.gy->forward(masked, interpolate_angle(r_y, r_corr, t), c);
    frames.push_back(composite(out, batch.images, batch.masks)[0]);
  }
  return frames;
}

void emit_grid(std::span<const torch::Tensor> frames, const std::filesystem::path& path) {
  if (frames.empty()) throw Error(ErrorKind::Usage, "no frames to write");
  write_image(make_strip(frames), path);
}

}  // namespace gazegan
