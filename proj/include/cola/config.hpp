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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cola/gateway.hpp"
#include "cola/keyframe.hpp"

namespace cola {

enum class Task { kHar, kVqa };
enum class VqaMode { kEnsemble, kCola };

std::string_view to_string(Task task);      // "har", "vqa-mcq"
std::string_view to_string(VqaMode mode);   // "ensemble", "cola"
Task parse_task(std::string_view name);     // accepts "vqa" for "vqa-mcq"
VqaMode parse_vqa_mode(std::string_view name);

struct RunConfig {
  Task task = Task::kHar;
  VqaMode mode = VqaMode::kCola;
  std::string dataset_manifest;
  std::vector<ModelEndpoint> endpoints;
  SelectionParams selection;
  std::string template_version = "cola-v1";
  std::string output_dir = "runs/latest";
  std::string cache_dir;  // empty: no response cache
  int parallel_videos = 4;
  std::uint64_t seed = 42;
  // Used for video sources that are neither framestreams nor image directories.
  std::string decoder_command = "ffmpeg -v error -i {input} -f rawvideo -pix_fmt rgb24 -";
  std::optional<std::string> instruction;  // overrides the task's default
  std::optional<double> fps;

  // Vision-language endpoints: every endpoint with the vqa capability, in
  // config order.
  std::vector<std::string> vlm_endpoints() const;
  // The single generate-capable endpoint; empty when there is none.
  std::string llm_endpoint() const;
  // First embed-capable endpoint; empty when there is none.
  std::string embed_endpoint() const;

  // Role requirements for the configured task and mode. Throws ConfigError.
  void validate() const;
};

// Environment overrides: COLA_<SEG>__<SEG>... = value, segments lower-cased
// and matched against the config tree, numeric segments indexing arrays.
// Values parse as JSON when they can, otherwise as strings. COLA_LOG is
// reserved for logging.
using EnvOverrides = std::vector<std::pair<std::string, std::string>>;
EnvOverrides cola_environment();

// Loads a JSON config file; relative paths resolve against its directory.
RunConfig load_run_config(const std::string& path, const EnvOverrides& env = cola_environment());
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir,
                           const EnvOverrides& env = {});

struct VqaItem {
  std::string item_id;
  std::string image_path;
  std::string question;
  std::vector<std::string> choices;
  std::size_t correct_choice_idx = 0;
};

struct HarItem {
  std::string video_id;
  std::string source;  // framestream file, image directory or container file
  std::string action_label;
};

struct DatasetManifest {
  Task task = Task::kHar;
  std::string split;
  std::vector<std::string> class_names;  // har only
  std::vector<VqaItem> vqa_items;
  std::vector<HarItem> har_items;

  std::size_t size() const noexcept {
    return task == Task::kHar ? har_items.size() : vqa_items.size();
  }
};

// Relative paths resolve against the manifest's directory. Throws ConfigError.
DatasetManifest load_manifest(const std::string& path, Task task);

}  // namespace cola
