#pragma once

#include <cstdint>
#include <random>

namespace ratchet {

/// Engine used everywhere. Its output sequence is fixed by the standard, so
/// seeded runs reproduce across platforms; the standard distributions are not,
/// hence the helpers below.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` of `parent`; order-sensitive in its inputs.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index + 0xD1B54A32D192ED03ULL));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on the open interval (0, 1).
inline double uniform_open01(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

/// Unbiased uniform integer in [0, n) by rejection; n >= 1.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

}  // namespace ratchet
