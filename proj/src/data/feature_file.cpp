// SPDX-License-Identifier: Apache-2.0
#include "vstg/data/feature_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "vstg/error.hpp"

namespace vstg {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_feature_file(const Tensor& t) {
  if (t.rank() > 2) throw ShapeError("feature files hold rank-2 tensors, got " + shape_str(t.shape()));
  const std::size_t rows = t.rank() == 2 ? t.shape()[0] : (t.empty() ? 0 : 1);
  const std::size_t cols = t.rank() == 2 ? t.shape()[1] : t.size();
  if (rows > std::numeric_limits<std::uint32_t>::max() || cols > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("tensor too large for feature file: " + shape_str(t.shape()));
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureFileHeaderBytes + 4 * t.size());
  for (char c : {'V', 'S', 'T', 'G'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, kFeatureFileVersion);
  put_u32(out, static_cast<std::uint32_t>(rows));
  put_u32(out, static_cast<std::uint32_t>(cols));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = t[i];
    if (!std::isfinite(v)) throw FormatError("non-finite value at element " + std::to_string(i));
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

Tensor decode_feature_file(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFeatureFileHeaderBytes) {
    throw FormatError("truncated header: " + std::to_string(bytes.size()) + " bytes at offset 0");
  }
  if (std::memcmp(bytes.data(), "VSTG", 4) != 0) throw FormatError("bad magic at offset 0");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFeatureFileVersion) {
    throw FormatError("unsupported version " + std::to_string(version) + " at offset 4");
  }
  const std::size_t rows = get_u32(bytes, 8);
  const std::size_t cols = get_u32(bytes, 12);
  const std::size_t n = rows * cols;
  const std::size_t expected = kFeatureFileHeaderBytes + 4 * n;
  if (bytes.size() < expected) {
    const std::size_t complete = (bytes.size() - kFeatureFileHeaderBytes) / 4;
    throw FormatError("truncated payload at offset " + std::to_string(kFeatureFileHeaderBytes + 4 * complete) +
                      ": expected " + std::to_string(expected) + " bytes, have " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing bytes at offset " + std::to_string(expected));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, kFeatureFileHeaderBytes + 4 * i)));
  }
  return Tensor({rows, cols}, std::move(data));
}

void write_feature_file(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_feature_file(t);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("write failed for " + path.string());
}

Tensor read_feature_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_feature_file(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace vstg
