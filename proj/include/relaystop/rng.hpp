#pragma once

#include <cstdint>
#include <random>

namespace relaystop {

using Rng = std::mt19937_64;

/// Independent, reproducible stream `stream` derived from a root seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  return Rng(seq);
}

// Stream ids used across the project so that solver sample sets and
// simulator draws never alias.
namespace streams {
inline constexpr std::uint64_t kFirstHop = 1000;   // + relay index
inline constexpr std::uint64_t kSecondHop = 2000;  // + relay index
inline constexpr std::uint64_t kSimulator = 3000;
}  // namespace streams

}  // namespace relaystop
