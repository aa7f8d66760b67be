#pragma once

#include <cstdint>
#include <random>

#include "treesim/errors.hpp"

namespace treesim {

// Seeded random stream. Substreams are derived from (seed, index) with splitmix64
// so replicates can run in parallel and still give a deterministic result order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(mix(seed)) {}

  RngStream(std::uint64_t seed, std::uint64_t substream)
      : eng_(mix(mix(seed) + 0x9e3779b97f4a7c15ULL * (substream + 1))) {}

  std::mt19937_64& engine() { return eng_; }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(eng_);
  }

  double exponential() {
    return std::exponential_distribution<double>(1.0)(eng_);
  }

  double gamma(double shape) {
    if (!(shape > 0.0)) throw domain_error("gamma: shape must be > 0");
    return std::gamma_distribution<double>(shape, 1.0)(eng_);
  }

  // Beta(a, 0) and Beta(0, b) are point masses at 1 and 0 respectively.
  double beta(double a, double b) {
    if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0))
      throw domain_error("beta: invalid parameters");
    if (b == 0.0) return 1.0;
    if (a == 0.0) return 0.0;
    for (;;) {
      const double x = gamma(a);
      const double y = gamma(b);
      if (x + y > 0.0) return x / (x + y);
      // both underflowed to 0 (tiny shapes); retry
    }
  }

  std::uint64_t bits() { return eng_(); }

  // uniform integer in [0, n)
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 eng_;
};

}  // namespace treesim
