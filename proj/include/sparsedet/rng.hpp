// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "sparsedet/linalg.hpp"

namespace sparsedet {

/// Stateless 64-bit mixer (splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the substream for one trial. Depends only on its arguments, so a
/// trial draws the same numbers whichever worker runs it.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t axis_index,
                                       std::uint64_t trial_index) {
  return mix64(mix64(mix64(master) ^ axis_index) ^ (trial_index * 0xd1b54a32d192ed03ULL));
}

/// Per-trial random stream producing standard circular complex Gaussians
/// (E|w|^2 = 1).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master, std::uint64_t axis_index, std::uint64_t trial_index)
      : engine_(substream_seed(master, axis_index, trial_index)) {}

  Complex circular_normal() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re * kHalfSqrt2, im * kHalfSqrt2};
  }

  CMatrix circular_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    CMatrix w(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) w(r, c) = circular_normal();
    return w;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  static constexpr double kHalfSqrt2 = 0.70710678118654752440;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sparsedet
