#include "bitcurve/qtns.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "bitcurve/errors.hpp"

namespace bitcurve::io {

namespace {

constexpr char kMagic[4] = {'Q', 'T', 'N', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeFloat32 = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& origin, const char* what) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ParseError(origin + ": truncated while reading " + what);
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return static_cast<T>(value);
}

}  // namespace

quant::Tensor read_qtns(std::istream& in, const std::string& origin) {
  char magic[4];
  if (!in.read(magic, 4)) throw ParseError(origin + ": truncated while reading magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError(origin + ": bad magic, not a QTNS file");
  }
  const auto version = read_le<std::uint32_t>(in, origin, "version");
  if (version != kVersion) {
    throw ParseError(origin + ": unsupported QTNS version " + std::to_string(version));
  }
  const auto ndim = read_le<std::uint32_t>(in, origin, "ndim");
  if (ndim == 0 || ndim > 8) {
    throw ParseError(origin + ": unreasonable ndim " + std::to_string(ndim));
  }
  quant::Tensor tensor;
  std::uint64_t numel = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    const auto dim = read_le<std::uint64_t>(in, origin, "dims");
    if (dim == 0 || numel > (std::numeric_limits<std::uint64_t>::max)() / dim) {
      throw ParseError(origin + ": bad dimension " + std::to_string(dim));
    }
    numel *= dim;
    tensor.dims.push_back(static_cast<std::int64_t>(dim));
  }
  if (numel > (1ull << 31)) {
    throw ParseError(origin + ": tensor too large");
  }
  const auto dtype = read_le<std::uint32_t>(in, origin, "dtype");
  if (dtype != kDtypeFloat32) {
    throw ParseError(origin + ": unsupported dtype code " + std::to_string(dtype));
  }
  tensor.data.resize(static_cast<std::size_t>(numel));
  for (auto& value : tensor.data) {
    value = std::bit_cast<float>(read_le<std::uint32_t>(in, origin, "payload"));
  }
  // Nothing else should follow the payload.
  char extra;
  if (in.read(&extra, 1)) {
    throw ParseError(origin + ": trailing bytes after payload");
  }
  return tensor;
}

quant::Tensor load_qtns(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open QTNS file: " + path);
  return read_qtns(in, path);
}

void write_qtns(std::ostream& out, const quant::Tensor& tensor) {
  if (tensor.dims.empty() || tensor.numel() != static_cast<std::int64_t>(tensor.data.size())) {
    throw std::invalid_argument("tensor shape/data mismatch");
  }
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto dim : tensor.dims) write_le<std::uint64_t>(out, static_cast<std::uint64_t>(dim));
  write_le<std::uint32_t>(out, kDtypeFloat32);
  for (float value : tensor.data) {
    write_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(value));
  }
}

void save_qtns(const std::string& path, const quant::Tensor& tensor) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_qtns(out, tensor);
  out.flush();
  if (!out) throw std::runtime_error("failed writing QTNS file: " + path);
}

}  // namespace bitcurve::io
