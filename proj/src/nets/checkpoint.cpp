#include "gazegan/nets/checkpoint.hpp"

#include "gazegan/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace gazegan {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'G', 'Z', 'G', 'N', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorKind::Checkpoint, "truncated checkpoint '" + path.string() + "'");
  }
  return value;
}

uint8_t dtype_code(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return 0;
    case torch::kFloat64: return 1;
    case torch::kInt64: return 2;
    default: throw Error(ErrorKind::Checkpoint, "unsupported tensor dtype in checkpoint");
  }
}

torch::ScalarType dtype_from_code(uint8_t code) {
  switch (code) {
    case 0: return torch::kFloat32;
    case 1: return torch::kFloat64;
    case 2: return torch::kInt64;
    default: throw Error(ErrorKind::Checkpoint, "unknown dtype code in checkpoint");
  }
}

}  // namespace

void write_checkpoint(const Checkpoint& checkpoint, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint '" + tmp.string() + "'");
    out.write(kMagic, sizeof(kMagic));
    put<uint32_t>(out, kCheckpointVersion);
    const std::string meta = checkpoint.metadata.dump();
    put<uint64_t>(out, meta.size());
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put<uint64_t>(out, checkpoint.tensors.size());
    for (const auto& [name, tensor] : checkpoint.tensors) {
      auto t = tensor.detach().to(torch::kCPU).contiguous();
      put<uint32_t>(out, static_cast<uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put<uint8_t>(out, dtype_code(t.scalar_type()));
      put<uint32_t>(out, static_cast<uint32_t>(t.dim()));
      for (int64_t s : t.sizes()) put<int64_t>(out, s);
      const uint64_t bytes = t.numel() * t.element_size();
      put<uint64_t>(out, bytes);
      out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(bytes));
    }
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint '" + path.string() + "'");
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::Checkpoint, "'" + path.string() + "' is not a checkpoint file");
  }
  const auto version = get<uint32_t>(in, path);
  if (version == 0 || version > kCheckpointVersion) {
    throw Error(ErrorKind::Checkpoint, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto meta_len = get<uint64_t>(in, path);
  std::string meta(meta_len, '\0');
  if (!in.read(meta.data(), static_cast<std::streamsize>(meta_len))) {
    throw Error(ErrorKind::Checkpoint, "truncated checkpoint metadata");
  }
  try {
    ck.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Checkpoint, std::string("bad checkpoint metadata: ") + e.what());
  }
  const auto count = get<uint64_t>(in, path);
  for (uint64_t i = 0; i < count; ++i) {
    const auto name_len = get<uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw Error(ErrorKind::Checkpoint, "truncated tensor name");
    const auto dtype = dtype_from_code(get<uint8_t>(in, path));
    const auto ndim = get<uint32_t>(in, path);
    std::vector<int64_t> sizes(ndim);
    for (auto& s : sizes) s = get<int64_t>(in, path);
    const auto bytes = get<uint64_t>(in, path);
    auto t = torch::empty(sizes, torch::TensorOptions().dtype(dtype));
    if (bytes != static_cast<uint64_t>(t.numel() * t.element_size())) {
      throw Error(ErrorKind::Checkpoint, "tensor '" + name + "' size does not match its shape");
    }
    if (!in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(bytes))) {
      throw Error(ErrorKind::Checkpoint, "truncated data for tensor '" + name + "'");
    }
    ck.tensors.emplace(std::move(name), std::move(t));
  }
  return ck;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

}  // namespace gazegan
