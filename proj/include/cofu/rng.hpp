#pragma once

// Deterministic random number generation with named substreams.
//
// Every stochastic routine in this library draws from a Rng constructed from
// a root seed plus one or more stream keys.  Streams with distinct keys are
// statistically independent, and the same (seed, keys) pair always yields the
// same draw sequence regardless of platform, thread count, or call site.
// Distributions are implemented here rather than taken from <random> because
// the standard leaves their output implementation-defined.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace cofu {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Substream identifiers used when deriving per-purpose generators.
enum class Stream : std::uint64_t {
  communities = 1,
  degrees = 2,
  network = 3,
  correlation = 4,
  design = 5,
  effects = 6,
  responses = 7,
  folds = 8,
  resample = 9,
  holdout = 10,
};

/// Mixes a root seed and stream keys into a single 64-bit engine seed.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = root ^ 0x5851f42d4c957f2dULL;
  std::uint64_t out = detail::splitmix64(state);
  for (std::uint64_t k : keys) {
    state ^= k + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
    out = detail::splitmix64(state);
  }
  return out;
}

/// Seeded generator with portable uniform/normal/integer draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t root, std::initializer_list<std::uint64_t> keys)
      : engine_(derive_seed(root, keys)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], inclusive; rejection sampling, no bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  /// Standard normal via Box-Muller (one variate per pair of uniforms).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double prob) { return uniform01() < prob; }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Draws `count` distinct indices from [0, pool) in random order.
  std::vector<int> sample_without_replacement(int pool, int count) {
    if (count > pool)
      throw std::invalid_argument("sample_without_replacement: count > pool");
    std::vector<int> all(pool);
    for (int i = 0; i < pool; ++i) all[i] = i;
    for (int i = 0; i < count; ++i) {
      const auto j =
          static_cast<int>(uniform_int(i, static_cast<std::int64_t>(pool) - 1));
      std::swap(all[i], all[j]);
    }
    all.resize(count);
    return all;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cofu
