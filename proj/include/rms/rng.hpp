#ifndef RMS_RNG_HPP
#define RMS_RNG_HPP

#include <cstdint>

namespace rms {

// Counter-based pseudo-randomness (SplitMix64 output function over an
// index-addressed 64-bit counter). Every uniform is a pure function of
// (seed, index), so paths are O(1)-seekable at any integer index, two-sided
// included: negative indices wrap through two's complement, which is just a
// different region of the same counter space.

inline std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::int64_t index) {
  const std::uint64_t counter = static_cast<std::uint64_t>(index);
  return splitmix64(seed + counter * 0x9E3779B97F4A7C15ULL + 0x9E3779B97F4A7C15ULL);
}

// Uniform in [0, 1), 53 significant bits.
inline double uniform01(std::uint64_t seed, std::int64_t index) {
  return static_cast<double>(counter_bits(seed, index) >> 11) * 0x1.0p-53;
}

// Derives an independent stream seed, e.g. one per Monte Carlo path.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ (0xC2B2AE3D27D4EB4FULL * (tag + 1) + 0x165667B19E3779F9ULL));
}

}  // namespace rms

#endif  // RMS_RNG_HPP
