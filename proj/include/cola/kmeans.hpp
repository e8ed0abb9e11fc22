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

#include <cstdint>
#include <span>
#include <vector>

#include "cola/features.hpp"

namespace cola {

struct KMeansOptions {
  int k = 1;
  std::uint64_t seed = 42;
  int max_iters = 100;
  double tol = 1e-6;
  int n_init = 10;  // independent seedings; the lowest inertia wins, earliest on ties
};

struct KMeansResult {
  std::vector<int> assignment;               // cluster per input point
  std::vector<FeatureVector> centroids;      // k rows
  double inertia = 0.0;                      // within-cluster sum of squares
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding, restarted n_init times from one
// generator.
//
// The generator is a seeded mt19937_64 whose raw output is mapped to [0,1)
// by taking the top 53 bits, so runs are reproducible across platforms.
// Stops after max_iters or when no centroid moves by tol or more. A cluster
// that empties is refilled with the point farthest from its own centroid.
// Ties in nearest-centroid search go to the lower cluster index.
KMeansResult kmeans_cluster(std::span<const FeatureVector> features, const KMeansOptions& options);

// Within-cluster sum of squared distances to cluster means.
double within_cluster_ss(std::span<const FeatureVector> features, std::span<const int> assignment,
                         int k);

}  // namespace cola
