#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace switchlab {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Stream seed for (master, key, purpose). Each component is mixed in turn,
/// so streams for one key never depend on which other keys exist.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key, std::string_view purpose) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ key) ^ fnv1a64(purpose));
}

/// Uniform on [0, 1) with 53 random bits; independent of the standard
/// library's distribution implementations.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on {0, ..., bound - 1} by rejection; bound >= 1.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace switchlab
