#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace tsc {

/// SplitMix64 step. Used to expand a 64-bit seed into generator state and to
/// derive independent sub-streams.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256** (xorshift family) seeded through SplitMix64.
///
/// All randomness in the library goes through this type so that a given seed
/// produces the same stream on every platform and in every port. Derived
/// quantities use only the documented transforms below, never <random>
/// distributions (whose output is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  /// Independent generator for sub-task `stream` (e.g. one k-means restart).
  [[nodiscard]] static Rng derive(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits: (next_u64() >> 11) * 2^-53.
  double uniform() noexcept;

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;

  /// Unbiased integer in [0, n) by rejection; n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal via Box-Muller (cosine branch, one value per call).
  double normal() noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    // Fisher-Yates, high index down.
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace tsc
