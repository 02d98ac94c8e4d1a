#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dmmse {

/// Stream domains mixed into a derived seed so that substreams for different
/// purposes never collide even when their numeric keys do.
enum class Stream : std::uint64_t {
  state = 0x5354415445ULL,
  noise = 0x4e4f495345ULL,
  trial = 0x545249414cULL,
  topology = 0x544f504fULL,
  world = 0x574f524c44ULL,
  noise_std = 0x5354444556ULL,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based split: hashes (master, domain, keys...) into an independent
/// 64-bit seed. Order-independent across callers, so per-agent or per-trial
/// sampling gives the same draws regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t master, Stream domain,
                          std::initializer_list<std::uint64_t> keys = {}) noexcept;

using Engine = std::mt19937_64;

Engine make_engine(std::uint64_t master, Stream domain,
                   std::initializer_list<std::uint64_t> keys = {});

}  // namespace dmmse
