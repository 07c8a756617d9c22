#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evprice {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used for all seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed for the named sub-stream `stream` and
/// replication `index` of a root seed. Streams used in this project:
/// "gen", "train", "pricer", "trace".
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed) { return Rng{mix64(seed)}; }

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace evprice
