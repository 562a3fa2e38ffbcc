#pragma once

// Reader/writer for the NPY v1.0 array format, restricted to little-endian
// float32/float64, C order, rank 1 or 2. Values are widened to double.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"

namespace latqubo {

enum class NpyDtype { f4, f8 };

struct NpyArray {
  std::vector<std::size_t> shape;
  Vector data;  // row-major
  NpyDtype dtype = NpyDtype::f8;

  std::size_t rank() const noexcept { return shape.size(); }

  /// Rank 2 as-is; rank 1 as an n×1 column.
  Matrix as_matrix() const {
    if (rank() == 1) return Matrix(shape[0], 1, data);
    return Matrix(shape[0], shape[1], data);
  }

  /// Rank 1, or rank 2 with a unit dimension.
  Vector as_vector() const {
    if (rank() == 2 && shape[0] != 1 && shape[1] != 1) {
      throw DimensionError("expected a vector, got a matrix of shape (" +
                           std::to_string(shape[0]) + ", " + std::to_string(shape[1]) + ")");
    }
    return data;
  }
};

namespace npy_detail {

inline constexpr std::string_view kMagic = "\x93NUMPY";

inline std::size_t find_key(std::string_view header, std::string_view key) {
  for (char quote : {'\'', '"'}) {
    std::string needle;
    needle += quote;
    needle += key;
    needle += quote;
    auto pos = header.find(needle);
    if (pos != std::string_view::npos) {
      pos = header.find(':', pos + needle.size());
      if (pos != std::string_view::npos) return pos + 1;
    }
  }
  throw FormatError("NPY header is missing the '" + std::string(key) + "' key");
}

inline void skip_space(std::string_view s, std::size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline std::string parse_descr(std::string_view header) {
  std::size_t i = find_key(header, "descr");
  skip_space(header, i);
  if (i >= header.size() || (header[i] != '\'' && header[i] != '"')) {
    throw FormatError("NPY header: descr is not a string");
  }
  const char quote = header[i++];
  const auto end = header.find(quote, i);
  if (end == std::string_view::npos) throw FormatError("NPY header: unterminated descr");
  return std::string(header.substr(i, end - i));
}

inline bool parse_fortran_order(std::string_view header) {
  std::size_t i = find_key(header, "fortran_order");
  skip_space(header, i);
  if (header.substr(i, 4) == "True") return true;
  if (header.substr(i, 5) == "False") return false;
  throw FormatError("NPY header: fortran_order is not a boolean");
}

inline std::vector<std::size_t> parse_shape(std::string_view header) {
  std::size_t i = find_key(header, "shape");
  skip_space(header, i);
  if (i >= header.size() || header[i] != '(') throw FormatError("NPY header: shape is not a tuple");
  const auto end = header.find(')', i);
  if (end == std::string_view::npos) throw FormatError("NPY header: unterminated shape");
  std::vector<std::size_t> shape;
  std::size_t j = i + 1;
  while (j < end) {
    while (j < end && (header[j] == ' ' || header[j] == ',')) ++j;
    if (j >= end) break;
    std::size_t value = 0;
    bool any = false;
    while (j < end && header[j] >= '0' && header[j] <= '9') {
      value = value * 10 + static_cast<std::size_t>(header[j] - '0');
      ++j;
      any = true;
    }
    if (!any) throw FormatError("NPY header: malformed shape entry");
    shape.push_back(value);
  }
  return shape;
}

template <typename T>
T load_le(const char* p) {
  char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace npy_detail

/// Parses an in-memory NPY byte string.
inline NpyArray parse_npy(std::string_view bytes) {
  using namespace npy_detail;
  if (bytes.size() >= 4 && bytes.substr(0, 4) == std::string_view("PK\x03\x04", 4)) {
    throw UnsupportedFeatureError(
        "container", "NPZ archives are not supported; extract the .npy members first");
  }
  if (bytes.size() < 10 || bytes.substr(0, 6) != kMagic) {
    throw FormatError("not an NPY file (bad magic bytes)");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw UnsupportedFeatureError("version", "unsupported NPY version " + std::to_string(major) +
                                                 "." + std::to_string(minor) + " (only 1.0)");
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < 10 + header_len) throw LengthMismatchError("NPY header is truncated");
  const std::string_view header = bytes.substr(10, header_len);

  NpyArray arr;
  const std::string descr = parse_descr(header);
  std::size_t item = 0;
  if (descr == "<f4") {
    arr.dtype = NpyDtype::f4;
    item = 4;
  } else if (descr == "<f8") {
    arr.dtype = NpyDtype::f8;
    item = 8;
  } else {
    throw UnsupportedFeatureError("descr", "unsupported NPY descr '" + descr +
                                              "' (only '<f4' and '<f8')");
  }
  if (parse_fortran_order(header)) {
    throw UnsupportedFeatureError("fortran_order", "fortran_order=True arrays are not supported");
  }
  arr.shape = parse_shape(header);
  if (arr.shape.empty() || arr.shape.size() > 2) {
    throw UnsupportedFeatureError("shape", "unsupported NPY rank " + std::to_string(arr.shape.size()) +
                                               " (only rank 1 or 2)");
  }

  std::size_t count = 1;
  for (auto s : arr.shape) count *= s;
  const std::size_t payload = bytes.size() - 10 - header_len;
  if (payload != count * item) {
    throw LengthMismatchError("NPY payload has " + std::to_string(payload) + " bytes, expected " +
                              std::to_string(count * item));
  }
  const char* p = bytes.data() + 10 + header_len;
  arr.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    arr.data[i] = item == 4 ? static_cast<double>(load_le<float>(p + 4 * i)) : load_le<double>(p + 8 * i);
  }
  return arr;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline NpyArray read_npy(const std::filesystem::path& path) {
  if (path.extension() == ".npz") {
    throw UnsupportedFeatureError(
        "container", "NPZ archives are not supported; extract the .npy members first: " + path.string());
  }
  return parse_npy(read_file_bytes(path));
}

/// Encodes an array as NPY v1.0 with the header padded so the payload starts
/// on a 64-byte boundary.
inline std::string encode_npy(const std::vector<std::size_t>& shape, std::span<const double> data,
                              NpyDtype dtype = NpyDtype::f8) {
  using namespace npy_detail;
  std::ostringstream dict;
  dict << "{'descr': '" << (dtype == NpyDtype::f4 ? "<f4" : "<f8")
       << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  std::string header = dict.str();
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::string out(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  store_le<std::uint16_t>(out, static_cast<std::uint16_t>(header.size()));
  out += header;
  for (double v : data) {
    if (dtype == NpyDtype::f4) {
      store_le<float>(out, static_cast<float>(v));
    } else {
      store_le<double>(out, v);
    }
  }
  return out;
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void write_npy(const std::filesystem::path& path, const Matrix& m,
                      NpyDtype dtype = NpyDtype::f8) {
  write_file_bytes(path, encode_npy({m.rows(), m.cols()}, m.values(), dtype));
}

inline void write_npy(const std::filesystem::path& path, std::span<const double> v,
                      NpyDtype dtype = NpyDtype::f8) {
  write_file_bytes(path, encode_npy({v.size()}, v, dtype));
}

}  // namespace latqubo
