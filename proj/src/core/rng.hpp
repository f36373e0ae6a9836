#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dplr {

// Deterministic random source with platform-stable output streams.
// std::mt19937_64 has a standardized bit stream; the distribution
// transforms below are fixed here instead of delegating to the standard
// library's unspecified distribution algorithms, so a seed reproduces the
// same draws on every platform and toolchain.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform draw in the open interval (0, 1), 53-bit resolution.
  double uniform() {
    const uint64_t bits = gen_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller; caches the second draw of each pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.28318530717958647692 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer; bijective on 64-bit values.
constexpr uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent child seed from a parent seed and an index.
constexpr uint64_t derive_seed(uint64_t parent, uint64_t index) {
  return mix64(parent ^ mix64(index + 0xA0761D6478BD642FULL));
}

constexpr uint64_t derive_seed(uint64_t parent, uint64_t a, uint64_t b) {
  return derive_seed(derive_seed(parent, a), b);
}

}  // namespace dplr
