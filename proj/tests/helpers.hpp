#pragma once

#include "gazegan/data/toy.hpp"
#include "gazegan/nets/bundle.hpp"

// c10 defines a CHECK macro of its own.
#undef CHECK
#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

namespace testing {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gazegan_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Small network configuration for fast tests.
inline gazegan::NetworkConfig tiny_config(int64_t resolution = 64, int64_t divisor = 8) {
  gazegan::NetworkConfig c;
  c.resolution = resolution;
  c.channel_divisor = divisor;
  return c;
}

inline gazegan::Dataset tiny_toy(int n = 12, uint64_t seed = 3, int resolution = 64) {
  gazegan::ToyOptions o;
  o.resolution = resolution;
  o.n_test_x = 2;
  o.n_test_y = 2;
  return gazegan::generate_toy_dataset(n, n, seed, o);
}

inline bool bit_equal(const torch::Tensor& a, const torch::Tensor& b) {
  return a.sizes() == b.sizes() && a.scalar_type() == b.scalar_type() && torch::equal(a, b);
}

}  // namespace testing
