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

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cola/kernels.hpp"
#include "detail/luv_pixel.hpp"

namespace cola::kernels::omp {

namespace {

// Below this many elements the thread team costs more than it saves.
constexpr std::int64_t kParallelMin = 1 << 14;
// Fixed reduction chunk; partial sums are combined in chunk order.
constexpr std::int64_t kChunk = 4096;

std::int64_t chunks_for(std::int64_t n) { return (n + kChunk - 1) / kChunk; }

}  // namespace

void rgb_to_luv(std::span<const std::uint8_t> rgb, std::span<double> luv) {
  const auto n = static_cast<std::int64_t>(rgb.size() / 3);
  const auto& table = detail::srgb_decode_table();
  const auto& white = detail::luv_white();
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (std::int64_t i = 0; i < n; ++i) {
    const Luv p = detail::linear_to_luv(table[rgb[3 * i]], table[rgb[3 * i + 1]],
                                        table[rgb[3 * i + 2]], white);
    luv[i] = p.l;
    luv[n + i] = p.u;
    luv[2 * n + i] = p.v;
  }
}

double mean_abs_diff(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<std::int64_t>(a.size());
  const std::int64_t chunks = chunks_for(n);
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t end = std::min(n, (c + 1) * kChunk);
    double s = 0.0;
    for (std::int64_t i = c * kChunk; i < end; ++i) s += std::abs(a[i] - b[i]);
    partial[c] = s;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum / static_cast<double>(n);
}

std::int64_t luma_milli_sum(std::span<const std::uint8_t> rgb, int width, int height) {
  const std::int64_t n = static_cast<std::int64_t>(width) * height;
  std::int64_t sum = 0;
#pragma omp parallel for schedule(static) reduction(+ : sum) if (n >= kParallelMin)
  for (std::int64_t i = 0; i < n; ++i) sum += luma_milli(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  return sum;
}

void luma_histogram(std::span<const std::uint8_t> rgb, int width, int height,
                    std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  const std::int64_t n = static_cast<std::int64_t>(width) * height;
#pragma omp parallel if (n >= kParallelMin)
  {
    std::vector<std::uint64_t> local(kLumaBins, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) ++local[luma_bin(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2])];
#pragma omp critical
    for (int b = 0; b < kLumaBins; ++b) counts[b] += local[b];
  }
}

void channel_histogram(std::span<const std::uint8_t> rgb, int width, int height, int bins,
                       std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  const std::int64_t n = static_cast<std::int64_t>(width) * height;
  const std::size_t len = static_cast<std::size_t>(3 * bins);
#pragma omp parallel if (n >= kParallelMin)
  {
    std::vector<std::uint64_t> local(len, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) ++local[c * bins + value_bin(rgb[3 * i + c], bins)];
    }
#pragma omp critical
    for (std::size_t b = 0; b < len; ++b) counts[b] += local[b];
  }
}

double laplacian_variance(std::span<const std::uint8_t> rgb, int width, int height) {
  const std::int64_t n = static_cast<std::int64_t>(width) * height;
  std::vector<std::int32_t> luma(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (std::int64_t i = 0; i < n; ++i) luma[i] = luma_milli(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);

  // One response row per iteration; border rows and columns replicate.
  std::vector<std::int64_t> response(static_cast<std::size_t>(n));
  std::vector<std::int64_t> row_sum(static_cast<std::size_t>(height), 0);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (int y = 0; y < height; ++y) {
    const std::int32_t* row = &luma[static_cast<std::size_t>(y) * width];
    const std::int32_t* up = &luma[static_cast<std::size_t>(std::max(y - 1, 0)) * width];
    const std::int32_t* down = &luma[static_cast<std::size_t>(std::min(y + 1, height - 1)) * width];
    std::int64_t* out = &response[static_cast<std::size_t>(y) * width];
    std::int64_t s = 0;
    for (int x = 0; x < width; ++x) {
      const std::int64_t left = row[std::max(x - 1, 0)];
      const std::int64_t right = row[std::min(x + 1, width - 1)];
      const std::int64_t r =
          left + right + static_cast<std::int64_t>(up[x]) + down[x] - 4 * static_cast<std::int64_t>(row[x]);
      out[x] = r;
      s += r;
    }
    row_sum[y] = s;
  }
  std::int64_t sum = 0;
  for (auto s : row_sum) sum += s;
  const double mean = static_cast<double>(sum) / static_cast<double>(n);

  std::vector<double> row_ss(static_cast<std::size_t>(height), 0.0);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (int y = 0; y < height; ++y) {
    const std::int64_t* r = &response[static_cast<std::size_t>(y) * width];
    double s = 0.0;
    for (int x = 0; x < width; ++x) {
      const double d = static_cast<double>(r[x]) - mean;
      s += d * d;
    }
    row_ss[y] = s;
  }
  double ss = 0.0;
  for (double s : row_ss) ss += s;
  return ss / static_cast<double>(n) / 1e6;
}

void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::size_t dim, std::span<int> assignment, std::span<double> dist2) {
  const auto n = static_cast<std::int64_t>(points.size() / dim);
  const std::size_t k = centroids.size() / dim;
#pragma omp parallel for schedule(static) if (n * static_cast<std::int64_t>(k * dim) >= kParallelMin)
  for (std::int64_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      double d = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double t = points[i * dim + j] - centroids[c * dim + j];
        d += t * t;
      }
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    assignment[i] = best_c;
    dist2[i] = best;
  }
}

}  // namespace cola::kernels::omp
