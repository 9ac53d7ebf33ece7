#pragma once

#include <cstdint>

namespace pilotwave {

/// xoshiro256** generator. Each (seed, stream) pair gives an independent
/// sequence, so trajectory i draws the same numbers on any worker.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in (0, 1].
  double uniform_open_low();
  /// Exponential variate with unit mean.
  double exponential();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

}  // namespace pilotwave
