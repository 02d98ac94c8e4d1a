#include "dmmse/rng.hpp"

namespace dmmse {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stream domain,
                          std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(domain)));
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

Engine make_engine(std::uint64_t master, Stream domain, std::initializer_list<std::uint64_t> keys) {
  return Engine(derive_seed(master, domain, keys));
}

}  // namespace dmmse
