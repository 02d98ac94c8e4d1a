#pragma once

#include <dmmse/model.hpp>
#include <dmmse/topology.hpp>

#include <cstdint>
#include <vector>

namespace fixtures {

/// Random world with folded-normal noise levels; all derived from one seed.
inline dmmse::WorldModel world(std::size_t p, std::size_t q, std::size_t m, std::uint64_t seed,
                               double noise_scale = 1.0) {
  const auto stds = dmmse::folded_normal_stds(m, noise_scale, seed ^ 0x9e3779b97f4a7c15ULL);
  return dmmse::random_world(p, q, m, stds, seed);
}

/// 4-cycle drawn as a square: 1-2, 1-3, 2-4, 3-4, so 1 and 4 are opposite.
inline dmmse::NetworkTopology square_cycle4() {
  return dmmse::NetworkTopology(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
}

}  // namespace fixtures
