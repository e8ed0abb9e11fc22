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

#include "cola/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cola/error.hpp"
#include "cola/kernels.hpp"

namespace cola {

namespace {

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double d = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double t = a[j] - b[j];
    d += t * t;
  }
  return d;
}

std::vector<std::size_t> seed_plus_plus(const std::vector<double>& pts, std::size_t n,
                                        std::size_t dim, int k, std::mt19937_64& rng) {
  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  chosen.push_back(std::min(n - 1, static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n))));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(&pts[i * dim], &pts[chosen[0] * dim], dim);

  while (chosen.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit_draw(rng) * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > target) break;
      }
    } else {
      // All remaining points coincide with a centre; take the first unused.
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(&pts[i * dim], &pts[pick * dim], dim));
    }
  }
  return chosen;
}

KMeansResult lloyd(const std::vector<double>& pts, std::size_t n, std::size_t dim, int k,
                   const KMeansOptions& options, std::mt19937_64& rng) {
  const auto seeds = seed_plus_plus(pts, n, dim, k, rng);
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> centroids(kk * dim);
  for (std::size_t c = 0; c < kk; ++c) {
    std::copy_n(&pts[seeds[c] * dim], dim, &centroids[c * dim]);
  }

  std::vector<int> assignment(n, 0);
  std::vector<double> dist2(n, 0.0);
  std::vector<double> sums(kk * dim);
  std::vector<std::size_t> counts(kk);
  int iter = 0;
  while (iter < options.max_iters) {
    ++iter;
    kernels::omp::assign_nearest(pts, centroids, dim, assignment, dist2);

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(assignment[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += pts[i * dim + j];
    }

    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(assignment[i])] < 2) continue;
        if (dist2[i] > far_d) {
          far_d = dist2[i];
          far = i;
        }
      }
      const auto old = static_cast<std::size_t>(assignment[far]);
      --counts[old];
      for (std::size_t j = 0; j < dim; ++j) sums[old * dim + j] -= pts[far * dim + j];
      assignment[far] = static_cast<int>(c);
      dist2[far] = 0.0;
      counts[c] = 1;
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] = pts[far * dim + j];
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
      double d = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double updated = sums[c * dim + j] / static_cast<double>(counts[c]);
        const double t = updated - centroids[c * dim + j];
        d += t * t;
        centroids[c * dim + j] = updated;
      }
      shift = std::max(shift, std::sqrt(d));
    }
    if (shift < options.tol) break;
  }

  KMeansResult result;
  result.assignment = std::move(assignment);
  result.iterations = iter;
  result.centroids.resize(kk);
  for (std::size_t c = 0; c < kk; ++c) {
    result.centroids[c].assign(centroids.begin() + static_cast<std::ptrdiff_t>(c * dim),
                               centroids.begin() + static_cast<std::ptrdiff_t>((c + 1) * dim));
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.inertia += sq_dist(&pts[i * dim],
                              &centroids[static_cast<std::size_t>(result.assignment[i]) * dim], dim);
  }
  return result;
}

}  // namespace

KMeansResult kmeans_cluster(std::span<const FeatureVector> features, const KMeansOptions& options) {
  const std::size_t n = features.size();
  const int k = options.k;
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (static_cast<std::size_t>(k) > n) {
    throw InvalidArgument("k=" + std::to_string(k) + " exceeds the " + std::to_string(n) +
                          " points to cluster");
  }
  if (options.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (options.n_init < 1) throw InvalidArgument("n_init must be >= 1");
  const std::size_t dim = features[0].size();
  if (dim == 0) throw InvalidArgument("feature vectors must be non-empty");

  std::vector<double> pts(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (features[i].size() != dim) throw InvalidArgument("feature vectors differ in length");
    for (std::size_t j = 0; j < dim; ++j) {
      if (std::isnan(features[i][j])) {
        throw InvalidArgument("NaN in feature vector " + std::to_string(i));
      }
      pts[i * dim + j] = features[i][j];
    }
  }

  std::mt19937_64 rng(options.seed);
  KMeansResult best = lloyd(pts, n, dim, k, options, rng);
  for (int run = 1; run < options.n_init; ++run) {
    auto r = lloyd(pts, n, dim, k, options, rng);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

double within_cluster_ss(std::span<const FeatureVector> features, std::span<const int> assignment,
                         int k) {
  if (features.empty()) return 0.0;
  const std::size_t dim = features[0].size();
  std::vector<std::vector<double>> means(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    ++counts[c];
    for (std::size_t j = 0; j < dim; ++j) means[c][j] += features[i][j];
  }
  for (std::size_t c = 0; c < means.size(); ++c) {
    if (counts[c] == 0) continue;
    for (auto& m : means[c]) m /= static_cast<double>(counts[c]);
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    ss += sq_dist(features[i].data(), means[static_cast<std::size_t>(assignment[i])].data(), dim);
  }
  return ss;
}

}  // namespace cola
