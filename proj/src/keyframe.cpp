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

#include "cola/keyframe.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "cola/color.hpp"
#include "cola/error.hpp"
#include "cola/image_io.hpp"
#include "cola/kmeans.hpp"

namespace cola {

void SelectionParams::validate() const {
  if (max_keyframes < 1) throw InvalidArgument("max_keyframes must be >= 1");
  if (!(luv_diff_threshold >= 0.0)) throw InvalidArgument("luv_diff_threshold must be >= 0");
  if (!(brightness_min >= 0.0 && brightness_min < brightness_max && brightness_max <= 255.0)) {
    throw InvalidArgument("brightness bounds must satisfy 0 <= min < max <= 255");
  }
  if (!(entropy_min >= 0.0 && entropy_min <= 8.0)) {
    throw InvalidArgument("entropy_min must lie in [0, 8]");
  }
  if (histogram_bins_per_channel < 1 || histogram_bins_per_channel > 256) {
    throw InvalidArgument("histogram_bins_per_channel must lie in [1, 256]");
  }
  if (kmeans_max_iters < 1) throw InvalidArgument("kmeans_max_iters must be >= 1");
  if (!(kmeans_tol >= 0.0)) throw InvalidArgument("kmeans_tol must be >= 0");
  if (kmeans_n_init < 1) throw InvalidArgument("kmeans_n_init must be >= 1");
}

bool passes_gates(double brightness, double entropy, const SelectionParams& params) {
  return brightness >= params.brightness_min && brightness <= params.brightness_max &&
         entropy >= params.entropy_min;
}

namespace {

template <typename NextFn>
std::vector<Candidate> filter_impl(NextFn next, const SelectionParams& params) {
  params.validate();
  std::vector<Candidate> out;
  std::optional<LuvPlanes> last;
  while (auto frame = next()) {
    const auto gates = gate_scores(*frame);
    if (!passes_gates(gates.brightness, gates.entropy, params)) continue;
    auto luv = rgb_to_luv(*frame);
    if (last) {
      const bool resized = last->width != luv.width || last->height != luv.height;
      if (!resized && !(luv_frame_diff(luv, *last) > params.luv_diff_threshold)) continue;
    }
    Candidate c;
    c.features = compute_features(*frame, params.histogram_bins_per_channel);
    c.frame = std::move(*frame);
    out.push_back(std::move(c));
    last = std::move(luv);
  }
  return out;
}

}  // namespace

std::vector<Candidate> candidate_filter(FrameStream& frames, const SelectionParams& params) {
  return filter_impl([&] { return frames.next(); }, params);
}

std::vector<Candidate> candidate_filter(std::span<const Frame> frames,
                                        const SelectionParams& params) {
  std::size_t i = 0;
  return filter_impl(
      [&]() -> std::optional<Frame> {
        if (i >= frames.size()) return std::nullopt;
        return frames[i++];
      },
      params);
}

std::vector<Keyframe> select_from_candidates(std::vector<Candidate> candidates,
                                             const SelectionParams& params,
                                             const std::string& video_id) {
  params.validate();
  std::vector<Keyframe> out;
  if (candidates.size() <= static_cast<std::size_t>(params.max_keyframes)) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      out.push_back(Keyframe{std::move(candidates[i].frame), std::move(candidates[i].features),
                             static_cast<int>(i), video_id});
    }
    return out;
  }

  std::vector<FeatureVector> hists;
  hists.reserve(candidates.size());
  for (const auto& c : candidates) hists.push_back(c.features.histogram);
  const auto km = kmeans_cluster(hists, KMeansOptions{params.max_keyframes, params.kmeans_seed,
                                                      params.kmeans_max_iters, params.kmeans_tol,
                                                      params.kmeans_n_init});

  std::vector<std::optional<std::size_t>> best(static_cast<std::size_t>(params.max_keyframes));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& slot = best[static_cast<std::size_t>(km.assignment[i])];
    if (!slot) {
      slot = i;
      continue;
    }
    const auto& cur = candidates[*slot];
    const auto& cand = candidates[i];
    const double a = cand.features.laplacian_variance;
    const double b = cur.features.laplacian_variance;
    if (a > b || (a == b && cand.frame.index < cur.frame.index)) slot = i;
  }
  for (std::size_t c = 0; c < best.size(); ++c) {
    if (!best[c]) continue;
    auto& src = candidates[*best[c]];
    out.push_back(Keyframe{std::move(src.frame), std::move(src.features), static_cast<int>(c),
                           video_id});
  }
  return out;
}

std::vector<Keyframe> select_keyframes(FrameStream& frames, const SelectionParams& params,
                                       const std::string& video_id) {
  return select_from_candidates(candidate_filter(frames, params), params, video_id);
}

void write_keyframes(const std::string& dir, const std::string& video_id,
                     const std::vector<Keyframe>& keyframes) {
  namespace fs = std::filesystem;
  const fs::path root = fs::path(dir) / video_id;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  nlohmann::json manifest;
  manifest["video_id"] = video_id;
  manifest["keyframes"] = nlohmann::json::array();
  for (const auto& kf : keyframes) {
    const std::string file = "kf_" + std::to_string(kf.cluster_id) + ".png";
    write_png_file((root / file).string(), kf.frame);
    manifest["keyframes"].push_back({
        {"cluster_id", kf.cluster_id},
        {"file", file},
        {"frame_index", kf.frame.index},
        {"timestamp_ms", kf.frame.timestamp_ms},
        {"width", kf.frame.width},
        {"height", kf.frame.height},
        {"brightness", kf.features.brightness},
        {"entropy", kf.features.entropy},
        {"laplacian_variance", kf.features.laplacian_variance},
        {"histogram", kf.features.histogram},
    });
  }
  std::ofstream out(root / "keyframes.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (root / "keyframes.json").string());
  out << manifest.dump(2) << "\n";
}

}  // namespace cola
