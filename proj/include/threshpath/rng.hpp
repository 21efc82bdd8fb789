#pragma once

#include <cstdint>

namespace threshpath {

// Algorithm identifier recorded in run metadata so seeded runs can be
// reproduced by other implementations.
inline constexpr const char* kRngAlgorithm = "splitmix64-v1";

// splitmix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937_64 plus
// std::uniform_int_distribution because the standard distribution is
// implementation-defined: the same seed would draw different values on
// different standard libraries. This stream is fully pinned.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, bound); bound >= 1. Rejection sampling keeps the
  // result independent of platform integer quirks.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) {
      next();  // keep the stream position independent of the bound
      return 0;
    }
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace threshpath
