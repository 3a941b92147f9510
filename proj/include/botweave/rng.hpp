#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace botweave {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for substream `index` of the named `stream`. Substreams depend only on
/// (seed, stream, index), never on the order in which work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(seed ^ hash_label(stream)) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(derive_seed(seed, stream, index)),
                    static_cast<std::uint32_t>(derive_seed(seed, stream, index) >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Stateless uniform [0, 1) value keyed by (seed, key).
constexpr double keyed_uniform01(std::uint64_t seed, std::uint64_t key) noexcept {
  return static_cast<double>(splitmix64(splitmix64(seed) ^ key) >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace botweave
