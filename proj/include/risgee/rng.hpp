// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

#include "risgee/common.hpp"

namespace risgee {

/// Counter-based SplitMix64 stream.
///
/// The n-th output of a stream is `mix64(key + (n + 1) * 0x9E3779B97F4A7C15)`,
/// so any draw can be reproduced from (key, counter) alone. Uniform doubles use
/// the top 53 bits; normals use Box-Muller with both outputs consumed in order.
/// Nothing here depends on the standard library's distribution
/// implementations, which differ between vendors.
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kName = "splitmix64-counter/box-muller";

  explicit Rng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Key for an independent sub-stream, e.g. (trial seed, grid index).
  static constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t stream) {
    return mix64(key ^ mix64(stream + 0x632BE59BD9B4E019ULL));
  }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    constexpr double kHalfRoot = 0.70710678118654752440;
    return {re * kHalfRoot, im * kHalfRoot};
  }

  Complex unit_phase() {
    const double phi = 2.0 * std::numbers::pi * uniform();
    return std::polar(1.0, phi);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace risgee
