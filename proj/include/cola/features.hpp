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

#include <vector>

#include "cola/frame.hpp"

namespace cola {

using FeatureVector = std::vector<double>;

// Per-frame scores used by the candidate gates and the clustering stage.
struct FrameFeatures {
  double brightness = 0.0;          // mean Rec.601 luma, [0,255]
  double entropy = 0.0;             // bits, 256-bin luma histogram, [0,8]
  FeatureVector histogram;          // R||G||B, each block sums to 1
  double laplacian_variance = 0.0;  // blur score; higher is sharper
};

double brightness_score(const Frame& frame);
double entropy_score(const Frame& frame);

// Per-channel histograms with bins of width ceil(256/bins) (last bin absorbs
// the remainder), each channel L1-normalised, concatenated R, G, B.
FeatureVector color_histogram(const Frame& frame, int bins);

// Population variance of the 4-neighbour Laplacian of luma with replicate
// borders. Requires width and height >= 3.
double laplacian_variance(const Frame& frame);

// Brightness and entropy only; what the candidate gates need.
struct GateScores {
  double brightness = 0.0;
  double entropy = 0.0;
};
GateScores gate_scores(const Frame& frame);

FrameFeatures compute_features(const Frame& frame, int histogram_bins);

}  // namespace cola
