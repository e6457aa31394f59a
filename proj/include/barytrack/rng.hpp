#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace barytrack::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent engine for task `index` under master `seed`. Streams depend only
/// on (seed, index), so results do not depend on task execution order.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ index));
}

/// Unbiased draw from [0, bound) by rejection. std::uniform_int_distribution
/// is implementation-defined, which would break cross-platform reproducibility.
inline std::uint64_t bounded(std::mt19937_64& eng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = eng();
  while (x >= limit) x = eng();
  return x % bound;
}

template <typename T>
void shuffle(std::span<T> items, std::mt19937_64& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(eng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace barytrack::rng
