#pragma once

#include <array>
#include <cstdint>

namespace blockid::numcore {

/// xoshiro256** stream seeded through SplitMix64.
///
/// A stream is single-owner. Parallel consumers take children via split(),
/// which hands the child the current state and advances the parent by 2^128
/// steps, so parent and child sequences never overlap.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double next_double() noexcept;
  /// Uniform on (0, 1].
  double next_double_open_zero() noexcept { return 1.0 - next_double(); }
  /// Uniform integer in [0, bound). Lemire's nearly-divisionless method.
  std::uint64_t next_below(std::uint64_t bound) noexcept;

  RngStream split() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

 private:
  RngStream(std::uint64_t seed, const std::array<std::uint64_t, 4>& state) noexcept
      : seed_(seed), s_(state) {}
  void jump() noexcept;

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace blockid::numcore
