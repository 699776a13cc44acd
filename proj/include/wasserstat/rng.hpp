#pragma once

#include <cstdint>
#include <random>

namespace wasserstat {

/// SplitMix64 finalizer. Used both to whiten user seeds and as the
/// documented stream-splitting rule.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Splitting rule for independent streams: `seed ^ splitmix64(stream)`,
/// rehashed. Replication t of a run with master seed s uses
/// derive_seed(s, t); streams with distinct indices never collide in
/// practice and the mapping is pure.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

}  // namespace wasserstat
