#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace svytree {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a base seed and stream coordinates (e.g. sample size, replicate)
/// into one seed: h = mix64(base); h = mix64(h ^ c) for each coordinate.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t c : coords) h = mix64(h ^ c);
  return h;
}

using Engine = std::mt19937_64;

/// Uniform on [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

/// Unbiased integer in [0, bound) by rejection.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r = eng();
  while (r >= limit) r = eng();
  return r % bound;
}

}  // namespace svytree
