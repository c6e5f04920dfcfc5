#pragma once

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace gazegan {

/// Checkpoint container, little-endian:
///
///   magic        8 bytes  "GZGNCKPT"
///   version      u32      kCheckpointVersion
///   meta_len     u64      length of the metadata JSON
///   metadata     meta_len bytes, UTF-8 JSON object
///   count        u64      number of tensors
///   count times:
///     name_len   u32, name bytes
///     dtype      u8       0 = float32, 1 = float64, 2 = int64
///     ndim       u32, then ndim x i64 sizes
///     byte_len   u64, then raw contiguous data
///
/// Readers accept any version <= kCheckpointVersion.
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::map<std::string, torch::Tensor> tensors;
};

/// Writes to "<path>.tmp" then renames, so a crash never leaves a partial file.
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Hex SHA-256 of a byte string / a file's contents.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace gazegan
