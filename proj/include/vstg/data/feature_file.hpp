// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vstg/numcore/tensor.hpp"

namespace vstg {

/// Binary matrix container:
///
///   offset 0   "VSTG"           4 bytes
///   offset 4   version  u32 LE  (currently 1)
///   offset 8   rows     u32 LE
///   offset 12  cols     u32 LE
///   offset 16  rows*cols float32 LE, row-major
///
/// Values are narrowed to float32 on write.
inline constexpr std::uint32_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureFileHeaderBytes = 16;

std::vector<std::uint8_t> encode_feature_file(const Tensor& t);
Tensor decode_feature_file(std::span<const std::uint8_t> bytes);

void write_feature_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_feature_file(const std::filesystem::path& path);

}  // namespace vstg
