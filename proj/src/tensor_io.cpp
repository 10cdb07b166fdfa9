#include "colprune/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "colprune/error.hpp"

namespace colprune {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

}  // namespace

std::string encode_tensor(const Matrix& m) {
  std::string out;
  out.reserve(kTensorHeaderBytes + 8 * m.size());
  out.append(kTensorMagic, sizeof(kTensorMagic));
  put_le<std::uint32_t>(out, kTensorFormatVersion);
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.cols());
  for (double v : m.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Matrix decode_tensor(std::string_view bytes) {
  if (bytes.size() < kTensorHeaderBytes) throw IoError("tensor: truncated header");
  if (std::memcmp(bytes.data(), kTensorMagic, sizeof(kTensorMagic)) != 0) {
    throw IoError("tensor: bad magic");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kTensorFormatVersion) {
    throw IoError("tensor: unsupported format version " + std::to_string(version));
  }
  const auto rows = get_le<std::uint64_t>(bytes, 8);
  const auto cols = get_le<std::uint64_t>(bytes, 16);
  if (rows == 0 || cols == 0) throw IoError("tensor: zero dimension");
  const std::uint64_t max_elems = (std::numeric_limits<std::uint64_t>::max() - kTensorHeaderBytes) / 8;
  if (rows > max_elems / cols) throw IoError("tensor: dimensions overflow");
  const std::uint64_t count = rows * cols;
  if (bytes.size() != kTensorHeaderBytes + 8 * count) {
    throw IoError("tensor: payload size " + std::to_string(bytes.size() - kTensorHeaderBytes) +
                  " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::vector<double> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, kTensorHeaderBytes + 8 * i));
  }
  Matrix m(rows, cols, std::move(data));
  if (!m.all_finite()) throw NumericError("tensor: non-finite entry in payload");
  return m;
}

void write_tensor(const std::filesystem::path& path, const Matrix& m) {
  const std::string bytes = encode_tensor(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace colprune
