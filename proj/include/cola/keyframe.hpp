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
#include <string>
#include <vector>

#include "cola/features.hpp"
#include "cola/frame.hpp"

namespace cola {

struct SelectionParams {
  int max_keyframes = 10;
  double luv_diff_threshold = 8.0;  // mean |dL|+|du|+|dv| per pixel per channel
  double brightness_min = 10.0;
  double brightness_max = 245.0;
  double entropy_min = 1.0;
  int histogram_bins_per_channel = 64;
  std::uint64_t kmeans_seed = 42;
  int kmeans_max_iters = 100;
  double kmeans_tol = 1e-6;
  int kmeans_n_init = 10;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct Candidate {
  Frame frame;
  FrameFeatures features;
};

struct Keyframe {
  Frame frame;
  FrameFeatures features;
  int cluster_id = 0;
  std::string source_video;
};

bool passes_gates(double brightness, double entropy, const SelectionParams& params);

// Scene-change candidates. The first frame that passes the brightness and
// entropy gates is always kept; after that a frame is kept when it also
// differs from the last kept frame by more than luv_diff_threshold. A frame
// whose size differs from the last kept one counts as a scene change.
std::vector<Candidate> candidate_filter(FrameStream& frames, const SelectionParams& params);
std::vector<Candidate> candidate_filter(std::span<const Frame> frames, const SelectionParams& params);

// Picks at most max_keyframes from the candidates: all of them when they fit,
// otherwise the sharpest frame (largest Laplacian variance, lower index on a
// tie) of each histogram cluster. Output is in cluster order, not time order.
std::vector<Keyframe> select_from_candidates(std::vector<Candidate> candidates,
                                             const SelectionParams& params,
                                             const std::string& video_id = {});

std::vector<Keyframe> select_keyframes(FrameStream& frames, const SelectionParams& params,
                                       const std::string& video_id = {});

// Writes <dir>/<video_id>/kf_<cluster_id>.png and <dir>/<video_id>/keyframes.json.
void write_keyframes(const std::string& dir, const std::string& video_id,
                     const std::vector<Keyframe>& keyframes);

}  // namespace cola
