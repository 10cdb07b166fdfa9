#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "colprune/matrix.hpp"

namespace colprune {

// Binary tensor layout (all integers and floats little-endian):
//
//   offset  size  field
//   0       4     magic "RCPU"
//   4       4     u32 format version (kTensorFormatVersion)
//   8       8     u64 rows
//   16      8     u64 cols
//   24      8*n   rows*cols IEEE-754 float64, row-major
//
// Readers reject a wrong magic or version, a truncated or oversized payload,
// zero dimensions, and non-finite entries.
inline constexpr char kTensorMagic[4] = {'R', 'C', 'P', 'U'};
inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 24;

std::string encode_tensor(const Matrix& m);
Matrix decode_tensor(std::string_view bytes);

void write_tensor(const std::filesystem::path& path, const Matrix& m);
Matrix read_tensor(const std::filesystem::path& path);

}  // namespace colprune
