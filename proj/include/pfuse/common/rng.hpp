#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace pfuse {

/// Derives an independent stream seed from a master seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

/// Seeded random source. Uniform and normal draws are computed from the raw
/// 64-bit engine output so that a seed produces the same stream on every
/// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pfuse
