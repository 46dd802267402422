// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vstg/numcore/tensor.hpp"

namespace vstg {

/// Deterministic generator: xoshiro256** whose 256-bit state is expanded
/// from the 64-bit seed with splitmix64. Every derived draw (uniform,
/// integer, Gaussian, shuffle) is implemented here rather than through
/// <random> distributions, whose output is implementation-defined.
///
/// Gaussian draws use the Marsaglia polar method and cache the second
/// variate.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev = 1.0);
  Tensor uniform_tensor(std::size_t rows, std::size_t cols, double lo, double hi);

  /// Independent child generator for a named sub-stream.
  Rng fork(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vstg
