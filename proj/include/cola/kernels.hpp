/* Copyright 2026 The Cola Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Per-pixel and per-point kernels behind the keyframe selector.
//
// Every kernel exists twice: `serial` is the plain single-accumulator
// reference kept for testing and benchmarking, `omp` is the OpenMP version
// used in production. The omp reductions accumulate fixed per-row or per-chunk partials
// and combine them in row order, so their results do not depend on the
// thread count. They may differ from the serial reference in the last bits
// of floating-point sums; integer outputs are identical.

#include <cstddef>
#include <cstdint>
#include <span>

namespace cola::kernels {

inline constexpr int kLumaBins = 256;

// Rec.601 luma scaled by 1000: 299 R + 587 G + 114 B, exact in integers.
inline constexpr std::int32_t luma_milli(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return 299 * r + 587 * g + 114 * b;
}

// Luma rounded half-up to the nearest integer in [0, 255].
inline constexpr int luma_bin(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return (luma_milli(r, g, b) + 500) / 1000;
}

// Bin index for an 8-bit value: width ceil(256/bins), last bin takes the rest.
inline constexpr int value_bin(std::uint8_t value, int bins) {
  const int width = (256 + bins - 1) / bins;
  const int b = value / width;
  return b < bins ? b : bins - 1;
}

#define COLA_KERNEL_DECLS                                                                   \
  /* rgb: w*h*3 bytes; luv: 3*w*h planar doubles. */                                        \
  void rgb_to_luv(std::span<const std::uint8_t> rgb, std::span<double> luv);                \
  double mean_abs_diff(std::span<const double> a, std::span<const double> b);               \
  std::int64_t luma_milli_sum(std::span<const std::uint8_t> rgb, int width, int height);   \
  void luma_histogram(std::span<const std::uint8_t> rgb, int width, int height,            \
                      std::span<std::uint64_t> counts);                                     \
  void channel_histogram(std::span<const std::uint8_t> rgb, int width, int height, int bins, \
                         std::span<std::uint64_t> counts);                                  \
  double laplacian_variance(std::span<const std::uint8_t> rgb, int width, int height);     \
  void assign_nearest(std::span<const double> points, std::span<const double> centroids,   \
                      std::size_t dim, std::span<int> assignment, std::span<double> dist2);

namespace serial {
COLA_KERNEL_DECLS
}  // namespace serial

namespace omp {
COLA_KERNEL_DECLS
}  // namespace omp

#undef COLA_KERNEL_DECLS

}  // namespace cola::kernels
