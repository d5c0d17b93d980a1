#pragma once

#include <cstddef>
#include <cstdint>

namespace pyrofit {

/// SplitMix64 with a fixed double conversion. Every draw must be
/// reproducible bit for bit by the browser renderer.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// An independent stream derived from this one.
  constexpr SplitMix64 split() { return SplitMix64(next()); }

  constexpr std::uint64_t state() const { return state_; }

  friend constexpr bool operator==(const SplitMix64&, const SplitMix64&) = default;

 private:
  std::uint64_t state_;
};

/// 64-bit FNV-1a, used for frame digests.
class Fnv1a64 {
 public:
  constexpr void update(const char* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= static_cast<unsigned char>(data[i]);
      hash_ *= 0x100000001B3ull;
    }
  }
  constexpr std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

}  // namespace pyrofit
