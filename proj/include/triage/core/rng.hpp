#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

// Platform-stable random helpers. std::mt19937_64 output is fixed by the
// standard; the standard distributions and std::shuffle are not, so seeded
// artifacts (splits, augmentations, scenes) go through these instead.
namespace triage::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

// FNV-1a, for folding strings (video ids) into stream keys.
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Uniform in [0, 1) with 53 bits of resolution.
inline double uniform01(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

// Uniform integer in [lo, hi] (inclusive) by rejection sampling.
inline std::uint64_t uniform_int(Engine& e, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t range = hi - lo;
  if (range == UINT64_MAX) return e();
  const std::uint64_t span = range + 1;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
  std::uint64_t x;
  do {
    x = e();
  } while (x >= limit);
  return lo + x % span;
}

template <typename T>
void shuffle(std::span<T> items, Engine& e) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(e, 0, i - 1));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace triage::rng
