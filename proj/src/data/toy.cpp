#include "gazegan/data/toy.hpp"

#include "gazegan/error.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace gazegan {

namespace {

constexpr uint8_t kSclera[3] = {235, 235, 230};
constexpr uint8_t kBrow[3] = {60, 42, 30};
constexpr uint8_t kMouth[3] = {150, 60, 60};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

uint8_t uniform_byte(std::mt19937_64& rng, int lo, int hi) {
  return static_cast<uint8_t>(std::floor(uniform(rng, lo, hi + 1 - 1e-9)));
}

std::mt19937_64 make_rng(uint64_t seed, uint32_t stream, int index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), stream,
                    static_cast<uint32_t>(index)};
  return std::mt19937_64(seq);
}

bool in_ellipse(double x, double y, Point c, double rx, double ry) {
  const double dx = (x - c.x) / rx;
  const double dy = (y - c.y) / ry;
  return dx * dx + dy * dy <= 1.0;
}

void shade(const ToyFaceParams& p, double x, double y, double rgb[3]) {
  const double s = p.resolution / 64.0;
  const uint8_t* c = p.background;
  if (in_ellipse(x, y, p.head_center, p.head_rx, p.head_ry)) c = p.skin;
  const double mouth_y = p.head_center.y + 13.0 * s;
  if (in_ellipse(x, y, {p.head_center.x, mouth_y}, 6.5 * s, 2.0 * s)) c = kMouth;
  for (const Point& eye : p.eye_centers) {
    const double brow_y = eye.y - 6.5 * s;
    if (std::abs(y - brow_y) <= 0.8 * s && std::abs(x - eye.x) <= 5.5 * s) c = kBrow;
    if (in_ellipse(x, y, eye, p.eye_rx, p.eye_ry)) {
      c = kSclera;
      const double ix = eye.x + p.gaze_offset.x;
      const double iy = eye.y + p.gaze_offset.y;
      if ((x - ix) * (x - ix) + (y - iy) * (y - iy) <= p.iris_radius * p.iris_radius) c = p.iris;
    }
  }
  for (int k = 0; k < 3; ++k) rgb[k] = c[k];
}

Point clamp_point(Point p, int res) {
  const double hi = static_cast<double>(res) - 1.0;
  return {std::clamp(p.x, 0.0, hi), std::clamp(p.y, 0.0, hi)};
}

std::vector<Point> toy_landmarks(const ToyFaceParams& p) {
  const double s = p.resolution / 64.0;
  const Point h = p.head_center;
  std::vector<Point> pts;
  pts.reserve(kLandmarkCount);
  for (int k = 0; k <= 16; ++k) {  // jaw
    const double t = std::numbers::pi - k * std::numbers::pi / 16.0;
    pts.push_back({h.x + p.head_rx * std::cos(t), h.y + p.head_ry * std::sin(t)});
  }
  for (const Point& eye : p.eye_centers) {  // brows
    for (int k = 0; k < 5; ++k) pts.push_back({eye.x - 5.0 * s + 2.5 * s * k, eye.y - 6.5 * s});
  }
  const double eye_y = 0.5 * (p.eye_centers[0].y + p.eye_centers[1].y);
  for (int k = 0; k < 4; ++k) pts.push_back({h.x, eye_y + 3.0 * s * k});  // nose bridge
  for (int k = 0; k < 5; ++k) pts.push_back({h.x - 3.0 * s + 1.5 * s * k, eye_y + 10.0 * s});
  for (const Point& e : p.eye_centers) {  // eyes, 36-41 then 42-47
    const double rx = p.eye_rx, ry = p.eye_ry;
    pts.push_back({e.x - rx, e.y});
    pts.push_back({e.x - rx / 3.0, e.y - ry});
    pts.push_back({e.x + rx / 3.0, e.y - ry});
    pts.push_back({e.x + rx, e.y});
    pts.push_back({e.x + rx / 3.0, e.y + ry});
    pts.push_back({e.x - rx / 3.0, e.y + ry});
  }
  const Point m{h.x, h.y + 13.0 * s};
  for (int k = 0; k < 12; ++k) {  // outer lip
    const double t = std::numbers::pi - k * 2.0 * std::numbers::pi / 12.0;
    pts.push_back({m.x + 6.5 * s * std::cos(t), m.y + 2.0 * s * std::sin(t)});
  }
  for (int k = 0; k < 8; ++k) {  // inner lip
    const double t = std::numbers::pi - k * 2.0 * std::numbers::pi / 8.0;
    pts.push_back({m.x + 3.9 * s * std::cos(t), m.y + 1.0 * s * std::sin(t)});
  }
  for (auto& q : pts) q = clamp_point(q, p.resolution);
  return pts;
}

}  // namespace

Point toy_gaze_offset(uint64_t seed, int index, double radius) {
  auto rng = make_rng(seed, 0x6761, index);
  const double u1 = std::generate_canonical<double, 53>(rng);
  const double u2 = std::generate_canonical<double, 53>(rng);
  const double rho = radius * std::sqrt(u1);
  const double theta = 2.0 * std::numbers::pi * u2;
  return {rho * std::cos(theta), rho * std::sin(theta)};
}

std::string toy_sample_id(Domain domain, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "toy_%s_%05d", domain == Domain::X ? "X" : "Y", index);
  return buf;
}

ToyFaceParams toy_face_params(uint64_t seed, Domain domain, int index, const ToyOptions& options) {
  if (options.resolution < 32) {
    throw Error(ErrorKind::Config, "toy faces need a resolution of at least 32");
  }
  ToyFaceParams p;
  p.resolution = options.resolution;
  const double s = options.resolution / 64.0;
  auto rng = make_rng(seed, domain == Domain::X ? 0x58 : 0x59, index);
  const double mid = options.resolution / 2.0 - 0.5;
  p.head_center = {mid + uniform(rng, -2.0, 2.0) * s, mid + (2.0 + uniform(rng, -2.0, 2.0)) * s};
  p.head_rx = uniform(rng, 20.5, 23.5) * s;
  p.head_ry = uniform(rng, 25.0, 28.0) * s;
  const double eye_y = p.head_center.y - (8.0 + uniform(rng, -0.5, 0.5)) * s;
  const double half_gap = uniform(rng, 9.5, 10.5) * s;
  p.eye_centers[0] = {p.head_center.x - half_gap, eye_y};
  p.eye_centers[1] = {p.head_center.x + half_gap, eye_y};
  p.eye_rx = uniform(rng, 4.8, 5.6) * s;
  p.eye_ry = uniform(rng, 2.6, 3.0) * s;
  p.iris_radius = uniform(rng, 1.8, 2.2) * s;
  const uint8_t gray = uniform_byte(rng, 30, 90);
  p.background[0] = gray;
  p.background[1] = static_cast<uint8_t>(std::min(255, gray + uniform_byte(rng, 0, 20)));
  p.background[2] = static_cast<uint8_t>(std::min(255, gray + uniform_byte(rng, 0, 30)));
  p.skin[0] = uniform_byte(rng, 170, 230);
  p.skin[1] = uniform_byte(rng, 130, 180);
  p.skin[2] = uniform_byte(rng, 100, 150);
  p.iris[0] = uniform_byte(rng, 20, 90);
  p.iris[1] = uniform_byte(rng, 20, 70);
  p.iris[2] = uniform_byte(rng, 10, 60);
  if (domain == Domain::Y) {
    const double radius = options.max_gaze_offset > 0.0 ? options.max_gaze_offset : 2.5 * s;
    p.gaze_offset = toy_gaze_offset(seed, index, radius);
  }
  return p;
}

ImageSample render_toy_face(const ToyFaceParams& params, const std::string& id, Domain domain) {
  const int res = params.resolution;
  auto hwc = torch::empty({res, res, 3}, torch::kUInt8);
  auto acc = hwc.accessor<uint8_t, 3>();
  constexpr double kSub[2] = {-0.25, 0.25};
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      double sum[3] = {0, 0, 0};
      for (double oy : kSub) {
        for (double ox : kSub) {
          double rgb[3];
          shade(params, x + ox, y + oy, rgb);
          for (int k = 0; k < 3; ++k) sum[k] += rgb[k];
        }
      }
      for (int k = 0; k < 3; ++k) {
        acc[y][x][k] = static_cast<uint8_t>(std::floor(sum[k] / 4.0 + 0.5));
      }
    }
  }
  ImageSample s;
  s.id = id;
  s.domain = domain;
  s.pixels = hwc.permute({2, 0, 1}).to(torch::kFloat32).div(127.5).sub(1.0).contiguous();
  s.landmarks = toy_landmarks(params);
  return s;
}

Dataset generate_toy_dataset(int n_x, int n_y, uint64_t seed, const ToyOptions& options) {
  if (n_x < 1 || n_y < 1) {
    throw Error(ErrorKind::Config, "toy dataset needs at least one sample per domain");
  }
  std::vector<ImageSample> samples;
  std::vector<std::string> ids_x, ids_y;
  for (Domain d : {Domain::X, Domain::Y}) {
    const int n = d == Domain::X ? n_x : n_y;
    for (int i = 0; i < n; ++i) {
      const auto id = toy_sample_id(d, i);
      samples.push_back(render_toy_face(toy_face_params(seed, d, i, options), id, d));
      (d == Domain::X ? ids_x : ids_y).push_back(id);
    }
  }
  const int tx = options.n_test_x >= 0 ? options.n_test_x : std::max(1, n_x / 5);
  const int ty = options.n_test_y >= 0 ? options.n_test_y : std::max(1, n_y / 5);
  auto split = make_split(ids_x, ids_y, tx, ty, seed ^ 0x5eed5eedULL);
  return Dataset(std::move(samples), std::move(split));
}

std::optional<Point> estimate_gaze_offset(const torch::Tensor& image, const MaskSpec& spec,
                                          std::span<const Point> landmarks) {
  auto lum = ((image.detach().to(torch::kCPU, torch::kFloat64).mean(0) + 1.0) / 2.0).contiguous();
  auto a = lum.accessor<double, 2>();
  Point total;
  const Rect* rects[2] = {&spec.left, &spec.right};
  const int firsts[2] = {kLeftEyeBegin, kRightEyeBegin};
  for (int e = 0; e < 2; ++e) {
    const Rect& r = *rects[e];
    double wsum = 0.0, cx = 0.0, cy = 0.0;
    for (int y = r.y0; y < r.y0 + r.height; ++y) {
      for (int x = r.x0; x < r.x0 + r.width; ++x) {
        const double w = std::max(0.0, 0.45 - a[y][x]);
        wsum += w;
        cx += w * x;
        cy += w * y;
      }
    }
    if (wsum < 1e-9) return std::nullopt;
    const Point center = eye_center(landmarks, firsts[e]);
    total.x += cx / wsum - center.x;
    total.y += cy / wsum - center.y;
  }
  return Point{total.x / 2.0, total.y / 2.0};
}

}  // namespace gazegan
