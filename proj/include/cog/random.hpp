#pragma once

#include <cstdint>
#include <random>

namespace cog {

// Draws built directly on mt19937_64 bits so that sequences do not depend on
// the standard library's distribution implementations.
class Random {
 public:
  explicit Random(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Integer in [lo, hi].
  int integer(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace cog
