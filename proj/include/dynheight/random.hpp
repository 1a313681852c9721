#pragma once

// Seeded 64-bit linear congruential generator (MMIX constants).  Output
// depends only on the seed, so synthetic models are reproducible across
// platforms and standard libraries.

#include <cstdint>

#include "dynheight/exactnum.hpp"

namespace dynheight {

class Lcg64 {
 public:
  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_ ^ (state_ >> 33);  // the low bits of an LCG are weak
  }

  /// Uniform in [0, n), n >= 1, by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  /// Uniform in [lo, hi].
  long between(long lo, long hi) {
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// num / den with num in [-num_bound, num_bound], den in [1, den_bound].
  Rational small_rational(long num_bound, long den_bound) {
    Rational r(between(-num_bound, num_bound), between(1, den_bound));
    r.canonicalize();
    return r;
  }

 private:
  std::uint64_t state_;
};

}  // namespace dynheight
