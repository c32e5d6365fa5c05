#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ssimpc {

// Named sub-stream seeding: every source of randomness in an episode
// (feature sampling, initial state, process noise) draws from its own
// stream derived from the master seed and a stream name. Changing one
// consumer (e.g. the feature count M) therefore never perturbs the
// realization seen by another.
namespace rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives the seed of the sub-stream `name` (optionally indexed) from a
/// master seed. Stable across platforms and runs.
constexpr std::uint64_t derive(std::uint64_t master, std::string_view name,
                               std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ fnv1a(name)) ^ index);
}

inline std::mt19937_64 engine(std::uint64_t master, std::string_view name,
                              std::uint64_t index = 0) {
  return std::mt19937_64(derive(master, name, index));
}

}  // namespace rng
}  // namespace ssimpc
