#pragma once

#include <cstdint>

namespace rgbt {

/// Deterministic splitmix64 stream; identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace rgbt
