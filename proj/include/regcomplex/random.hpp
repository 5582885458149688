#pragma once

#include "regcomplex/types.hpp"

#include <array>
#include <cstdint>

namespace regcomplex {

// xoshiro256** seeded through splitmix64. Everything stochastic in the
// library draws from this generator so that runs are reproducible from a
// single 64-bit seed.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via the Box-Muller transform. Values come in pairs; the
  /// second value of each pair is cached for the following call.
  double normal();

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// n i.i.d. standard normals.
Vector standard_normals(Index n, Xoshiro256& rng);

/// A point drawn uniformly from the closed Euclidean ball of `radius` around
/// `center`.
Vector sample_ball(const Vector& center, double radius, Xoshiro256& rng);

}  // namespace regcomplex
