#pragma once

#include <cstdint>
#include <random>

namespace sigtest {

std::uint64_t splitmix64(std::uint64_t& state);

/**
 * Reproducible random stream for replication `stream` of a run seeded by `seed`.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard; its seed is derived from (seed, stream) by SplitMix64. Uniforms use
 * the top 53 bits, normals use Box-Muller and exponentials use inversion, so
 * draws are identical on every conforming platform.
 */
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  double exponential(double rate);
  bool bernoulli(double p);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace sigtest
