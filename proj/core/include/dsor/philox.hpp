// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC'11) and the fixed stream layout the
// toolkit uses for reproducible synthetic data.
//
// Every random draw is a pure function of (seed, stream, index, attempt):
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (index & 0xffffffff, index >> 32, stream, attempt)
// so results never depend on call order or thread scheduling, and the only
// floating-point operations are the documented conversions below.

#ifndef DSOR_PHILOX_HPP_
#define DSOR_PHILOX_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace dsor {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

[[nodiscard]] constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53U;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32U);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32U);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Stream ids. Changing these changes every generated corpus.
enum class RngStream : std::uint32_t {
  kSceneNoise = 1,
  kSnowRange = 2,
  kSnowDirection = 3,
  kSubsample = 4,
  kLayout = 5,
  kTest = 0xFFFF,
};

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, RngStream stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U)},
        stream_(static_cast<std::uint32_t>(stream)) {}

  [[nodiscard]] constexpr PhiloxCounter block(std::uint64_t index,
                                              std::uint32_t attempt = 0) const noexcept {
    return philox4x32_10({static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32U), stream_, attempt},
                         key_);
  }

  [[nodiscard]] constexpr std::uint64_t bits64(std::uint64_t index,
                                               std::uint32_t attempt = 0) const noexcept {
    const auto b = block(index, attempt);
    return (static_cast<std::uint64_t>(b[1]) << 32U) | b[0];
  }

  /// Two independent doubles in [0, 1), each from 53 random bits.
  [[nodiscard]] constexpr std::array<double, 2> uniform2(std::uint64_t index,
                                                         std::uint32_t attempt = 0) const noexcept {
    const auto b = block(index, attempt);
    return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
  }

  [[nodiscard]] constexpr double uniform(std::uint64_t index,
                                         std::uint32_t attempt = 0) const noexcept {
    return uniform2(index, attempt)[0];
  }

  /// Standard normal draw by Box-Muller on uniform2(index, attempt).
  [[nodiscard]] double normal(std::uint64_t index, std::uint32_t attempt = 0) const noexcept {
    const auto u = uniform2(index, attempt);
    // 1 - u lies in (0, 1], keeping the logarithm finite.
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u[0]));
    return radius * std::cos(2.0 * std::numbers::pi * u[1]);
  }

 private:
  static constexpr double to_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32U) | lo) >> 11U;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  PhiloxKey key_;
  std::uint32_t stream_;
};

/// Seed for the i-th member of a corpus generated from `base`.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return base + index;
}

}  // namespace dsor

#endif  // DSOR_PHILOX_HPP_
