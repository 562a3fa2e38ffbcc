#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace latqubo {

/// SplitMix64 finalizer. Used to turn (seed, tag) pairs into well-mixed
/// engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// The single random source used everywhere in the library.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the standard.
/// The std distributions are implementation-defined, so every transform is
/// done here by hand:
///   - uniform01: top 53 bits of one draw scaled by 2^-53, in [0, 1)
///   - uniform_index(n): rejection sampling on one draw, `x % n` once
///     `x >= 2^64 mod n`
///   - normal: Box-Muller on a pair (u1 in (0,1], u2 in [0,1)); the sine
///     branch is cached and returned by the next call
///
/// Independent streams come from `Rng(seed, tag)`, which seeds the engine
/// with splitmix64(seed ^ splitmix64(fnv1a64(tag))). Two components sharing
/// a run seed but using different tags never share a stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, std::string_view tag)
      : engine_(splitmix64(seed ^ splitmix64(fnv1a64(tag)))) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace latqubo
