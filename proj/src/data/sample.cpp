#include "gazegan/data/sample.hpp"

#include "gazegan/error.hpp"

namespace gazegan {

std::string_view to_string(Domain domain) {
  return domain == Domain::X ? "X" : "Y";
}

Domain domain_from_string(std::string_view text) {
  if (text == "X" || text == "x") return Domain::X;
  if (text == "Y" || text == "y") return Domain::Y;
  throw Error(ErrorKind::Data, "unknown domain '" + std::string(text) + "'");
}

void validate_sample(const ImageSample& sample) {
  const auto& px = sample.pixels;
  if (!px.defined() || px.dim() != 3 || px.size(0) != 3) {
    throw Error(ErrorKind::Shape, "sample '" + sample.id + "': pixels must be (3,H,W)");
  }
  if (static_cast<int>(sample.landmarks.size()) < kLandmarkCount) {
    throw Error(ErrorKind::Data, "sample '" + sample.id + "': malformed landmarks, expected " +
                                     std::to_string(kLandmarkCount) + " points, got " +
                                     std::to_string(sample.landmarks.size()));
  }
  const double h = static_cast<double>(px.size(1));
  const double w = static_cast<double>(px.size(2));
  for (const auto& p : sample.landmarks) {
    if (!(p.x >= 0.0 && p.x < w && p.y >= 0.0 && p.y < h)) {
      throw Error(ErrorKind::Data, "sample '" + sample.id + "': landmark outside image bounds");
    }
  }
  if (px.min().item<double>() < -1.0 || px.max().item<double>() > 1.0) {
    throw Error(ErrorKind::Data, "sample '" + sample.id + "': pixel values outside [-1,1]");
  }
}

}  // namespace gazegan
