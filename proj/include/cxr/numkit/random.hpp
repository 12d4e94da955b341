#pragma once

// Deterministic random streams. Distributions are computed here rather than
// through <random> distribution objects, whose outputs differ across
// standard library implementations.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace cxr::numkit {

std::uint64_t splitmix64(std::uint64_t x);

/// Independent sub-stream seed: seed xor splitmix64(stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return seed ^ splitmix64(stream); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer on [0, n). n must be positive.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cxr::numkit
