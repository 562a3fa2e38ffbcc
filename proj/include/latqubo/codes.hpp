#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "latqubo/errors.hpp"
#include "latqubo/npy.hpp"

namespace latqubo {

/// One binary latent code, one byte per bit (values 0 or 1).
using Code = std::vector<std::uint8_t>;

/// N codes of m bits each, stored row-major.
class BinaryCodeSet {
 public:
  BinaryCodeSet() = default;
  BinaryCodeSet(std::size_t n, std::size_t m) : n_(n), m_(m), bits_(n * m, 0) {}
  BinaryCodeSet(std::size_t n, std::size_t m, std::vector<std::uint8_t> bits)
      : n_(n), m_(m), bits_(std::move(bits)) {
    if (bits_.size() != n_ * m_) throw DimensionError("code set: bit count does not match n*m");
    for (auto b : bits_) {
      if (b > 1) throw ValidationError("code set: entries must be 0 or 1");
    }
  }

  static BinaryCodeSet from_codes(const std::vector<Code>& codes) {
    if (codes.empty()) return {};
    BinaryCodeSet set(codes.size(), codes.front().size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (codes[i].size() != set.m_) throw DimensionError("code set: codes have different lengths");
      set.set_row(i, codes[i]);
    }
    return set;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return m_; }
  bool empty() const noexcept { return n_ == 0; }

  std::span<const std::uint8_t> row(std::size_t i) const { return {bits_.data() + i * m_, m_}; }
  Code code(std::size_t i) const {
    auto r = row(i);
    return Code(r.begin(), r.end());
  }
  std::uint8_t operator()(std::size_t i, std::size_t k) const { return bits_[i * m_ + k]; }

  void set(std::size_t i, std::size_t k, bool bit) { bits_[i * m_ + k] = bit ? 1 : 0; }
  void set_row(std::size_t i, std::span<const std::uint8_t> code) {
    for (std::size_t k = 0; k < m_; ++k) {
      if (code[k] > 1) throw ValidationError("code set: entries must be 0 or 1");
      bits_[i * m_ + k] = code[k];
    }
  }

  BinaryCodeSet subset(std::span<const std::size_t> rows) const {
    BinaryCodeSet out(rows.size(), m_);
    for (std::size_t i = 0; i < rows.size(); ++i) out.set_row(i, row(rows[i]));
    return out;
  }

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryCodeSet&, const BinaryCodeSet&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<std::uint8_t> bits_;
};

inline std::string code_to_string(std::span<const std::uint8_t> code) {
  std::string s(code.size(), '0');
  for (std::size_t k = 0; k < code.size(); ++k) s[k] = code[k] ? '1' : '0';
  return s;
}

inline Code code_from_string(std::string_view s) {
  Code c(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '0' && s[k] != '1') throw FormatError("code string contains a character other than 0/1");
    c[k] = s[k] == '1' ? 1 : 0;
  }
  return c;
}

/// Text format: one line per code, m characters of '0'/'1'.
inline std::string format_codes(const BinaryCodeSet& codes) {
  std::string out;
  out.reserve(codes.size() * (codes.dim() + 1));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out += code_to_string(codes.row(i));
    out.push_back('\n');
  }
  return out;
}

inline BinaryCodeSet parse_codes(std::string_view text) {
  std::vector<std::uint8_t> bits;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (n == 0) m = line.size();
    if (line.size() != m) {
      throw ParseError(line_no, "code line " + std::to_string(line_no) + " has " +
                                    std::to_string(line.size()) + " bits, expected " + std::to_string(m));
    }
    for (char c : line) {
      if (c != '0' && c != '1') {
        throw ParseError(line_no, "code line " + std::to_string(line_no) + " contains '" +
                                      std::string(1, c) + "'");
      }
      bits.push_back(c == '1' ? 1 : 0);
    }
    ++n;
  }
  return BinaryCodeSet(n, m, std::move(bits));
}

inline void write_codes(const std::filesystem::path& path, const BinaryCodeSet& codes) {
  write_file_bytes(path, format_codes(codes));
}

inline BinaryCodeSet read_codes(const std::filesystem::path& path) {
  return parse_codes(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Packed representation for Hamming distance
// ---------------------------------------------------------------------------

inline std::size_t words_for(std::size_t m) { return (m + 63) / 64; }

/// Packs bit k into word k/64 at position k%64.
inline void pack_code(std::span<const std::uint8_t> code, std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  for (std::size_t k = 0; k < code.size(); ++k) {
    if (code[k]) out[k / 64] |= std::uint64_t{1} << (k % 64);
  }
}

inline std::vector<std::uint64_t> pack_code(std::span<const std::uint8_t> code) {
  std::vector<std::uint64_t> out(words_for(code.size()));
  pack_code(code, out);
  return out;
}

inline std::size_t hamming_packed(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::size_t d = 0;
  for (std::size_t w = 0; w < a.size(); ++w) d += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
  return d;
}

inline std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DimensionError("hamming: code lengths differ");
  std::size_t d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d += a[k] != b[k];
  return d;
}

}  // namespace latqubo
