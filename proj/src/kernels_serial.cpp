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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cola/kernels.hpp"
#include "detail/luv_pixel.hpp"

namespace cola::kernels::serial {

void rgb_to_luv(std::span<const std::uint8_t> rgb, std::span<double> luv) {
  const std::size_t n = rgb.size() / 3;
  for (std::size_t i = 0; i < n; ++i) {
    const Luv p = detail::pixel_to_luv(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
    luv[i] = p.l;
    luv[n + i] = p.u;
    luv[2 * n + i] = p.v;
  }
}

double mean_abs_diff(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

std::int64_t luma_milli_sum(std::span<const std::uint8_t> rgb, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += luma_milli(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  return sum;
}

void luma_histogram(std::span<const std::uint8_t> rgb, int width, int height,
                    std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  for (std::size_t i = 0; i < n; ++i) ++counts[luma_bin(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2])];
}

void channel_histogram(std::span<const std::uint8_t> rgb, int width, int height, int bins,
                       std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) ++counts[c * bins + value_bin(rgb[3 * i + c], bins)];
  }
}

double laplacian_variance(std::span<const std::uint8_t> rgb, int width, int height) {
  std::vector<std::int32_t> luma(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < luma.size(); ++i) {
    luma[i] = luma_milli(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  }
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return static_cast<std::int64_t>(luma[static_cast<std::size_t>(y) * width + x]);
  };
  std::vector<std::int64_t> response(luma.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      response[static_cast<std::size_t>(y) * width + x] =
          at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4 * at(x, y);
    }
  }
  std::int64_t sum = 0;
  for (auto r : response) sum += r;
  const double mean = static_cast<double>(sum) / static_cast<double>(response.size());
  double ss = 0.0;
  for (auto r : response) {
    const double d = static_cast<double>(r) - mean;
    ss += d * d;
  }
  // Responses are in milli-luma units.
  return ss / static_cast<double>(response.size()) / 1e6;
}

void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::size_t dim, std::span<int> assignment, std::span<double> dist2) {
  const std::size_t n = points.size() / dim;
  const std::size_t k = centroids.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
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

}  // namespace cola::kernels::serial
