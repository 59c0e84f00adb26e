#pragma once

#include <cstdint>
#include <random>

namespace cbr {

/// SplitMix64 finalizer. Used to derive independent sub-seeds from one root
/// seed: `derive_seed(root, stream)` is stable across platforms and builds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  return splitmix64(root ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Counter values for `derive_seed`. Every randomized component of the
/// pipeline draws from its own stream so it can be reproduced in isolation.
namespace seed_stream {
inline constexpr std::uint64_t undersample = 1;
inline constexpr std::uint64_t split = 2;
inline constexpr std::uint64_t folds = 3;
inline constexpr std::uint64_t scoring = 4;
inline constexpr std::uint64_t pso = 5;
inline constexpr std::uint64_t probability = 6;
inline constexpr std::uint64_t kmeans = 7;
inline constexpr std::uint64_t classifier = 8;
}  // namespace seed_stream

/// Engine plus portable draws. std::uniform_*_distribution is implementation
/// defined, so the few draws we need are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  /// Uniform integer in [0, n). Lemire-style rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Fisher-Yates shuffle with portable draws.
  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cbr
