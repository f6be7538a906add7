#pragma once

#include <cstdint>
#include <random>

namespace sdpsa {

using Rng = std::mt19937_64;

/// Independent stochastic channels split off one master seed.
enum class Stream : std::uint64_t {
  episodes = 0x65706973ULL,
  projection = 0x70726f6aULL,
  ocba = 0x6f636261ULL,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of channel `stream` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ static_cast<std::uint64_t>(stream)) + index);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

// 53-bit uniform in [0, 1); platform independent unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace sdpsa
