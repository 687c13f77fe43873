#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rlct {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// Counter-mode child seed: derive_seed(parent, {a, b, ...}) folds each index
/// into the parent with mix64. The result depends only on the path, never on
/// scheduling, so any single trial can be regenerated in isolation.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                                  std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(parent);
  for (std::uint64_t index : path) {
    s = mix64(s ^ mix64(index + 0x632be59bd9b4e019ULL));
  }
  return s;
}

/// Stream tags for the independent random streams of one trial.
enum class Stream : std::uint64_t {
  kTruth = 1,
  kData = 2,
  kMcmc = 3,
  kTest = 4,
};

}  // namespace rlct
