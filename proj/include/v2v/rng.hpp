#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace v2v {

using Rng = std::mt19937_64;

/// FNV-1a over a byte string. Used for stream names and config hashes.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for a named stream of a master seed. Streams do not
/// share state, so turning one subsystem off never shifts another's draws.
inline Rng make_stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index = 0) {
  std::uint64_t s = splitmix64(master_seed ^ fnv1a(name));
  s = splitmix64(s ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace v2v
