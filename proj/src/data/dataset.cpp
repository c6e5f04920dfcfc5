#include "gazegan/data/dataset.hpp"

#include "gazegan/data/image_io.hpp"
#include "gazegan/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

namespace gazegan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> sorted(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

void split_pool(std::span<const std::string> pool, int n_test, std::mt19937_64& rng,
                std::vector<std::string>& train, std::vector<std::string>& test) {
  std::vector<std::string> ids(pool.begin(), pool.end());
  std::sort(ids.begin(), ids.end());
  std::shuffle(ids.begin(), ids.end(), rng);
  size_t n = static_cast<size_t>(std::max(n_test, 0));
  if (ids.size() > 1) n = std::min(n, ids.size() - 1);
  else n = std::min(n, ids.size());
  test = sorted({ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n)});
  train = sorted({ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end()});
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw Error(ErrorKind::Data, std::string("split file: missing list '") + key + "'");
  }
  return j[key].get<std::vector<std::string>>();
}

}  // namespace

DatasetSplit make_split(std::span<const std::string> ids_x, std::span<const std::string> ids_y,
                        int n_test_x, int n_test_y, uint64_t seed) {
  DatasetSplit split;
  std::mt19937_64 rng(seed);
  split_pool(ids_x, n_test_x, rng, split.train_x, split.test_x);
  split_pool(ids_y, n_test_y, rng, split.train_y, split.test_y);
  return split;
}

Dataset::Dataset(std::vector<ImageSample> samples, DatasetSplit split)
    : samples_(std::move(samples)), split_(std::move(split)) {
  masks_.reserve(samples_.size());
  for (size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    validate_sample(s);
    if (!index_.emplace(s.id, i).second) {
      throw Error(ErrorKind::Data, "duplicate sample id '" + s.id + "'");
    }
    if (s.height() != samples_.front().height() || s.width() != samples_.front().width()) {
      throw Error(ErrorKind::Shape, "dataset samples differ in resolution");
    }
    masks_.push_back(compute_eye_masks(s.landmarks, s.height(), s.width()));
  }
  auto check = [&](const std::vector<std::string>& ids, Domain domain, const char* name) {
    for (const auto& id : ids) {
      if (!contains(id)) {
        throw Error(ErrorKind::Data, std::string("split ") + name + " names unknown id '" + id + "'");
      }
      if (sample(id).domain != domain) {
        throw Error(ErrorKind::Data, std::string("split ") + name + " holds id '" + id +
                                         "' from the wrong domain");
      }
    }
  };
  check(split_.train_x, Domain::X, "train_X");
  check(split_.test_x, Domain::X, "test_X");
  check(split_.train_y, Domain::Y, "train_Y");
  check(split_.test_y, Domain::Y, "test_Y");
  std::set<std::string> tx(split_.test_x.begin(), split_.test_x.end());
  std::set<std::string> ty(split_.test_y.begin(), split_.test_y.end());
  for (const auto& id : split_.train_x) {
    if (tx.count(id)) throw Error(ErrorKind::Data, "train_X and test_X overlap on '" + id + "'");
  }
  for (const auto& id : split_.train_y) {
    if (ty.count(id)) throw Error(ErrorKind::Data, "train_Y and test_Y overlap on '" + id + "'");
  }
}

const ImageSample& Dataset::sample(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::Data, "unknown sample id '" + id + "'");
  return samples_[it->second];
}

const MaskSpec& Dataset::masks(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::Data, "unknown sample id '" + id + "'");
  return masks_[it->second];
}

int64_t Dataset::resolution() const {
  return samples_.empty() ? 0 : samples_.front().height();
}

Batch Batch::to(torch::ScalarType dtype) const {
  Batch b = *this;
  b.images = images.to(dtype);
  b.masks = masks.to(dtype);
  for (auto& s : b.specs) s.mask = s.mask.to(dtype);
  return b;
}

Batch make_batch(const Dataset& dataset, std::span<const std::string> ids) {
  if (ids.empty()) throw Error(ErrorKind::Data, "make_batch: empty id list");
  Batch batch;
  std::vector<torch::Tensor> images, masks;
  for (const auto& id : ids) {
    batch.ids.push_back(id);
    images.push_back(dataset.sample(id).pixels);
    const auto& spec = dataset.masks(id);
    masks.push_back(spec.mask);
    batch.specs.push_back(spec);
  }
  batch.images = torch::stack(images);
  batch.masks = torch::stack(masks);
  return batch;
}

Batch make_batch(const ImageSample& sample) {
  validate_sample(sample);
  Batch batch;
  batch.ids = {sample.id};
  batch.images = sample.pixels.unsqueeze(0);
  batch.specs = {compute_eye_masks(sample.landmarks, sample.height(), sample.width())};
  batch.masks = batch.specs[0].mask.unsqueeze(0);
  return batch;
}

std::vector<std::string> sample_batch_ids(std::span<const std::string> pool, int batch_size,
                                          uint64_t seed, uint64_t stream, int64_t step) {
  if (pool.empty()) throw Error(ErrorKind::Data, "cannot draw a batch from an empty pool");
  const auto ustep = static_cast<uint64_t>(step);
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream), static_cast<uint32_t>(ustep),
                    static_cast<uint32_t>(ustep >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  std::vector<std::string> ids;
  ids.reserve(static_cast<size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) ids.push_back(pool[pick(rng)]);
  return ids;
}

std::vector<LandmarkRecord> read_landmarks(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open landmark file '" + path.string() + "'");
  std::vector<LandmarkRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    LandmarkRecord r;
    r.id = j.at("id").get<std::string>();
    for (const auto& p : j.at("landmarks")) {
      if (!p.is_array() || p.size() != 2) {
        throw Error(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) +
                                         ": landmark must be an [x, y] pair");
      }
      r.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (static_cast<int>(r.points.size()) != kLandmarkCount) {
      throw Error(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) +
                                       ": malformed landmarks, expected 68 points");
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_landmarks(std::span<const LandmarkRecord> records, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write landmark file '" + path.string() + "'");
  for (const auto& r : records) {
    json pts = json::array();
    for (const auto& p : r.points) pts.push_back({p.x, p.y});
    out << json{{"id", r.id}, {"landmarks", pts}}.dump() << '\n';
  }
}

void save_split(const DatasetSplit& split, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  json j{{"train_X", split.train_x},
         {"train_Y", split.train_y},
         {"test_X", split.test_x},
         {"test_Y", split.test_y}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write split file '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

DatasetSplit load_split(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open split file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "split file '" + path.string() + "': " + e.what());
  }
  DatasetSplit s;
  s.train_x = string_list(j, "train_X");
  s.train_y = string_list(j, "train_Y");
  s.test_x = string_list(j, "test_X");
  s.test_y = string_list(j, "test_Y");
  return s;
}

Dataset load_dataset(const fs::path& root, const fs::path& landmarks_file,
                     const LoadOptions& options, LoadReport* report) {
  LoadReport local;
  std::unordered_map<std::string, std::vector<Point>> landmarks;
  for (auto& r : read_landmarks(landmarks_file)) landmarks[r.id] = std::move(r.points);

  std::vector<ImageSample> samples;
  std::vector<std::string> ids_x, ids_y;
  for (Domain domain : {Domain::X, Domain::Y}) {
    const fs::path dir = root / std::string(to_string(domain));
    if (!fs::is_directory(dir)) {
      throw Error(ErrorKind::Io, "dataset directory '" + dir.string() + "' not found");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto ext = entry.path().extension().string();
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".PNG" || ext == ".JPG") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string id = file.stem().string();
      auto it = landmarks.find(id);
      if (it == landmarks.end()) {
        ++local.skipped_missing_landmarks;
        continue;
      }
      ImageSample s;
      s.id = id;
      s.domain = domain;
      s.pixels = read_image(file);
      s.landmarks = it->second;
      if (options.resolution &&
          (s.height() != *options.resolution || s.width() != *options.resolution)) {
        const double sy = static_cast<double>(*options.resolution) / static_cast<double>(s.height());
        const double sx = static_cast<double>(*options.resolution) / static_cast<double>(s.width());
        for (auto& p : s.landmarks) {
          // Pixel centers sit at integer coordinates.
          p.x = std::clamp((p.x + 0.5) * sx - 0.5, 0.0, static_cast<double>(*options.resolution) - 1);
          p.y = std::clamp((p.y + 0.5) * sy - 0.5, 0.0, static_cast<double>(*options.resolution) - 1);
        }
        s.pixels = resize_area(s.pixels, *options.resolution, *options.resolution);
      }
      (domain == Domain::X ? ids_x : ids_y).push_back(id);
      samples.push_back(std::move(s));
      ++local.loaded;
    }
  }

  DatasetSplit split;
  const fs::path split_file = root / "split.json";
  if (fs::exists(split_file)) {
    split = load_split(split_file);
    local.split_from_file = true;
    // Ids whose landmarks were missing are dropped from the stored split.
    std::set<std::string> present(ids_x.begin(), ids_x.end());
    present.insert(ids_y.begin(), ids_y.end());
    for (auto* list : {&split.train_x, &split.train_y, &split.test_x, &split.test_y}) {
      std::erase_if(*list, [&](const std::string& id) { return !present.count(id); });
    }
  } else {
    split = make_split(ids_x, ids_y, options.n_test_x, options.n_test_y, options.split_seed);
  }
  if (report) *report = local;
  return Dataset(std::move(samples), std::move(split));
}

void save_dataset(const Dataset& dataset, const fs::path& root) {
  std::vector<LandmarkRecord> records;
  for (const auto& s : dataset.samples()) {
    write_image(s.pixels, root / std::string(to_string(s.domain)) / (s.id + ".png"));
    records.push_back({s.id, s.landmarks});
  }
  write_landmarks(records, root / "landmarks.jsonl");
  save_split(dataset.split(), root / "split.json");
}

}  // namespace gazegan
