#pragma once

#include "cubeshuffle/domain.hpp"

#include <random>

namespace cubeshuffle {

using Rng = std::mt19937_64;

/// Seed from CUBE_SHUFFLE_SEED when set, otherwise `fallback`.
std::uint64_t seed_from_env(std::uint64_t fallback);

/// Guillotine partition of I^n into `pieces` boxes with small-denominator breakpoints.
std::vector<Cube> random_partition(std::size_t n, std::size_t pieces, Rng& rng);

/// Random subcube of `box`, possibly equal to it, with corners on a 1/12 sub-grid of the box.
Cube random_subcube(const Cube& box, Rng& rng);

/// Finite domain with indices 1..m, one random subcube per partition piece.
NDomain random_finite_domain(std::size_t n, std::size_t m, Rng& rng);

struct RandomScenario {
  NDomain r;
  NDomain s;
  std::vector<Index> fixed;
};

/// Two random domains on indices 1..m agreeing on `fixed_count` fixed cubes that the moving cubes avoid.
RandomScenario random_scenario(std::size_t n, std::size_t m, std::size_t fixed_count, Rng& rng);

}  // namespace cubeshuffle
