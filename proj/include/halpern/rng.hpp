#pragma once

#include <cstdint>

namespace halpern {

/// Counter-based generator: draw i is splitmix64(seed + (i + 1) * golden).
/// Every draw is a pure function of (seed, i), so streams are reproducible
/// bit-for-bit on any platform with IEEE doubles.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace halpern
