#pragma once

#include <cstdint>

namespace gbrw {

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed split: stream r of a base seed. Replicate r draws its
/// seed as splitmix64(seed + (r+1) * golden), so replicates can run in any
/// order (or in parallel) with identical results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t r) {
  return splitmix64(seed + (r + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace gbrw
