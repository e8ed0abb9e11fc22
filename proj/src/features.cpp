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

#include "cola/features.hpp"

#include <array>
#include <cmath>

#include "cola/error.hpp"
#include "cola/kernels.hpp"

namespace cola {

namespace {

double entropy_from_counts(const std::array<std::uint64_t, kernels::kLumaBins>& counts,
                           std::size_t total) {
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  // -0.0 for single-bin histograms
  return h <= 0.0 ? 0.0 : h;
}

}  // namespace

double brightness_score(const Frame& frame) {
  validate_frame(frame);
  const auto sum = kernels::omp::luma_milli_sum(frame.pixels, frame.width, frame.height);
  return static_cast<double>(sum) / 1000.0 / static_cast<double>(frame.pixel_count());
}

double entropy_score(const Frame& frame) {
  validate_frame(frame);
  std::array<std::uint64_t, kernels::kLumaBins> counts{};
  kernels::omp::luma_histogram(frame.pixels, frame.width, frame.height, counts);
  return entropy_from_counts(counts, frame.pixel_count());
}

GateScores gate_scores(const Frame& frame) {
  return {brightness_score(frame), entropy_score(frame)};
}

FeatureVector color_histogram(const Frame& frame, int bins) {
  if (bins < 1) throw InvalidArgument("histogram bins must be >= 1, got " + std::to_string(bins));
  if (bins > 256) throw InvalidArgument("histogram bins must be <= 256, got " + std::to_string(bins));
  validate_frame(frame);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(3 * bins));
  kernels::omp::channel_histogram(frame.pixels, frame.width, frame.height, bins, counts);
  const double n = static_cast<double>(frame.pixel_count());
  FeatureVector hist(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) hist[i] = static_cast<double>(counts[i]) / n;
  return hist;
}

double laplacian_variance(const Frame& frame) {
  validate_frame(frame);
  if (frame.width < 3 || frame.height < 3) {
    throw InvalidArgument("laplacian_variance needs at least 3x3 pixels, got " +
                          std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
  return kernels::omp::laplacian_variance(frame.pixels, frame.width, frame.height);
}

FrameFeatures compute_features(const Frame& frame, int histogram_bins) {
  FrameFeatures f;
  const auto gates = gate_scores(frame);
  f.brightness = gates.brightness;
  f.entropy = gates.entropy;
  f.histogram = color_histogram(frame, histogram_bins);
  f.laplacian_variance = laplacian_variance(frame);
  return f;
}

}  // namespace cola
