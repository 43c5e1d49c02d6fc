#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ipsd {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent generator from a root seed and a stream path.
// Jobs that run concurrently each get their own derived stream, so results
// do not depend on scheduling or worker count.
inline std::mt19937_64 derive_rng(std::uint64_t root_seed,
                                  std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t state = root_seed ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t mixed = splitmix64(state);
  for (std::uint64_t id : path) {
    state ^= id + 0x9e3779b97f4a7c15ULL + (mixed << 6) + (mixed >> 2);
    mixed = splitmix64(state);
  }
  return std::mt19937_64(mixed);
}

}  // namespace ipsd
