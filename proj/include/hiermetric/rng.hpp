#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace hiermetric {

/// SplitMix64 generator. The whole state is one 64-bit word, and every
/// derived quantity (uniforms, normals, permutations) is computed here rather
/// than through <random> distributions so streams match across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one draw per call, second value discarded).
  double normal() noexcept;

  /// Uniform integer in [0, n). Unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const noexcept;

  std::uint64_t state() const noexcept { return state_; }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace hiermetric
