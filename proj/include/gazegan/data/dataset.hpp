#pragma once

#include "gazegan/data/masks.hpp"
#include "gazegan/data/sample.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace gazegan {

struct DatasetSplit {
  std::vector<std::string> train_x;
  std::vector<std::string> train_y;
  std::vector<std::string> test_x;
  std::vector<std::string> test_y;
};

/// Canonical held-out sizes for the full-scale dataset.
inline constexpr int kCanonicalTestX = 100;
inline constexpr int kCanonicalTestY = 300;

/// Seeded random split: n_test ids per domain are held out, the rest train.
/// Counts larger than the pool are clamped so at least one id stays in train
/// when the pool has more than one.
DatasetSplit make_split(std::span<const std::string> ids_x, std::span<const std::string> ids_y,
                        int n_test_x, int n_test_y, uint64_t seed);

/// Immutable collection of samples with their eye masks and a split.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ImageSample> samples, DatasetSplit split);

  const ImageSample& sample(const std::string& id) const;
  const MaskSpec& masks(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  const std::vector<ImageSample>& samples() const { return samples_; }
  const DatasetSplit& split() const { return split_; }
  int64_t resolution() const;

 private:
  std::vector<ImageSample> samples_;
  std::vector<MaskSpec> masks_;
  std::unordered_map<std::string, size_t> index_;
  DatasetSplit split_;
};

/// A batch of images with their masks, stacked along dim 0.
struct Batch {
  std::vector<std::string> ids;
  torch::Tensor images;  // (N,3,H,W)
  torch::Tensor masks;   // (N,1,H,W)
  std::vector<MaskSpec> specs;

  int64_t size() const { return static_cast<int64_t>(ids.size()); }
  Batch to(torch::ScalarType dtype) const;
};

Batch make_batch(const Dataset& dataset, std::span<const std::string> ids);
/// Single-item batch; masks come from the sample's landmarks.
Batch make_batch(const ImageSample& sample);

/// Draws `batch_size` ids with replacement from `pool`; the draw depends only
/// on (seed, stream, step) so resumed runs see the same batches.
std::vector<std::string> sample_batch_ids(std::span<const std::string> pool, int batch_size,
                                          uint64_t seed, uint64_t stream, int64_t step);

struct LoadReport {
  int loaded = 0;
  int skipped_missing_landmarks = 0;
  bool split_from_file = false;
};

struct LoadOptions {
  uint64_t split_seed = 0;
  int n_test_x = kCanonicalTestX;
  int n_test_y = kCanonicalTestY;
  std::optional<int64_t> resolution;  // resize to this square size if set
};

/// Reads `root/X/*` and `root/Y/*` images, joins them with the landmark file
/// and loads `root/split.json` when present (otherwise a seeded split).
Dataset load_dataset(const std::filesystem::path& root, const std::filesystem::path& landmarks_file,
                     const LoadOptions& options = {}, LoadReport* report = nullptr);

/// Writes a dataset in the layout `load_dataset` reads.
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

void save_split(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit load_split(const std::filesystem::path& path);

struct LandmarkRecord {
  std::string id;
  std::vector<Point> points;
};

/// JSON-lines: {"id": "...", "landmarks": [[x,y], ... 68 pairs]}
std::vector<LandmarkRecord> read_landmarks(const std::filesystem::path& path);
void write_landmarks(std::span<const LandmarkRecord> records, const std::filesystem::path& path);

}  // namespace gazegan
