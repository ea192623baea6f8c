#pragma once

// Counter-based random numbers (Philox2x64-10).  Each draw is a pure
// function of (seed, trajectory index, step index), so trajectories are
// reproducible bit-for-bit and independent of worker count or scheduling.

#include <array>
#include <cstdint>

namespace qmf {

namespace philox {

inline constexpr std::uint64_t kMultiplier = 0xD2B74407B1CE6E93ULL;
inline constexpr std::uint64_t kWeylStep = 0x9E3779B97F4A7C15ULL;

// One 128-bit block keyed by `key`, counter words (c0, c1), 10 rounds.
inline std::array<std::uint64_t, 2> block(std::uint64_t key, std::uint64_t c0,
                                          std::uint64_t c1) {
  std::uint64_t x0 = c0;
  std::uint64_t x1 = c1;
  std::uint64_t k = key;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 product = static_cast<unsigned __int128>(kMultiplier) * x0;
    const std::uint64_t hi = static_cast<std::uint64_t>(product >> 64);
    const std::uint64_t lo = static_cast<std::uint64_t>(product);
    x0 = hi ^ k ^ x1;
    x1 = lo;
    k += kWeylStep;
  }
  return {x0, x1};
}

}  // namespace philox

// Uniform double in [0, 1) from the top 53 bits of the first output word.
inline double uniform01(std::uint64_t seed, std::uint64_t trajectory,
                        std::uint64_t step) {
  const auto words = philox::block(seed, trajectory, step);
  return static_cast<double>(words[0] >> 11) * 0x1.0p-53;
}

}  // namespace qmf
