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

#include "cola/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "cola/error.hpp"
#include "cola/log.hpp"

extern char** environ;

using nlohmann::json;
namespace fs = std::filesystem;

namespace cola {

std::string_view to_string(Task task) { return task == Task::kHar ? "har" : "vqa-mcq"; }

std::string_view to_string(VqaMode mode) { return mode == VqaMode::kCola ? "cola" : "ensemble"; }

Task parse_task(std::string_view name) {
  if (name == "har") return Task::kHar;
  if (name == "vqa" || name == "vqa-mcq") return Task::kVqa;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected har or vqa-mcq)");
}

VqaMode parse_vqa_mode(std::string_view name) {
  if (name == "cola") return VqaMode::kCola;
  if (name == "ensemble") return VqaMode::kEnsemble;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected ensemble or cola)");
}

std::vector<std::string> RunConfig::vlm_endpoints() const {
  std::vector<std::string> out;
  for (const auto& ep : endpoints) {
    if (ep.has(Capability::kVqa)) out.push_back(ep.name);
  }
  return out;
}

std::string RunConfig::llm_endpoint() const {
  for (const auto& ep : endpoints) {
    if (ep.has(Capability::kGenerate)) return ep.name;
  }
  return {};
}

std::string RunConfig::embed_endpoint() const {
  for (const auto& ep : endpoints) {
    if (ep.has(Capability::kEmbed)) return ep.name;
  }
  return {};
}

void RunConfig::validate() const {
  if (dataset_manifest.empty()) throw ConfigError("dataset_manifest is required");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (template_version != "cola-v1") {
    throw ConfigError("unsupported template_version '" + template_version + "'");
  }
  if (parallel_videos < 1) throw ConfigError("parallel_videos must be >= 1");
  std::set<std::string> names;
  for (const auto& ep : endpoints) {
    ep.validate();
    if (!names.insert(ep.name).second) throw ConfigError("duplicate endpoint name '" + ep.name + "'");
    if (ep.name.find(']') != std::string::npos || ep.name.find('/') != std::string::npos) {
      throw ConfigError("endpoint name '" + ep.name + "' may not contain ']' or '/'");
    }
  }
  try {
    selection.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("selection: ") + e.what());
  }

  const auto vlms = vlm_endpoints();
  std::size_t llms = 0;
  for (const auto& ep : endpoints) llms += ep.has(Capability::kGenerate) ? 1 : 0;
  if (vlms.empty()) throw ConfigError("at least one endpoint with the vqa capability is required");
  const bool cola_path = task == Task::kHar || mode == VqaMode::kCola;
  if (cola_path) {
    if (llms != 1) {
      throw ConfigError("exactly one generate-capable endpoint is required, found " +
                        std::to_string(llms));
    }
    for (const auto& ep : endpoints) {
      if (ep.has(Capability::kVqa) && !ep.has(Capability::kCaption)) {
        throw ConfigError("vision endpoint '" + ep.name + "' needs the caption capability");
      }
    }
  } else if (embed_endpoint().empty()) {
    throw ConfigError("ensemble mode requires an embed-capable endpoint");
  }
}

EnvOverrides cola_environment() {
  EnvOverrides out;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    if (entry.substr(0, 5) != "COLA_") continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string key(entry.substr(5, eq - 5));
    if (key == "LOG") continue;
    out.emplace_back(key, std::string(entry.substr(eq + 1)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

const std::set<std::string> kTopKeys = {
    "task",         "mode",      "dataset_manifest", "endpoints",       "selection",
    "template_version", "output_dir", "cache_dir",   "parallel_videos", "seed",
    "decoder_command",  "instruction", "fps"};
const std::set<std::string> kSelectionKeys = {
    "max_keyframes",  "luv_diff_threshold", "brightness_min", "brightness_max",
    "entropy_min",    "histogram_bins_per_channel", "kmeans_seed", "kmeans_max_iters",
    "kmeans_tol", "kmeans_n_init"};
const std::set<std::string> kEndpointKeys = {
    "name",       "base_url",           "capabilities",       "timeout_ms",     "max_retries",
    "max_concurrency", "backoff_initial_ms", "backoff_multiplier", "backoff_max_ms",
    "max_prompt_chars", "bearer_token",   "bearer_token_env"};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, _] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void apply_override(json& root, const std::string& key, const std::string& raw) {
  std::vector<std::string> path;
  std::size_t start = 0;
  while (true) {
    const auto sep = key.find("__", start);
    path.push_back(lower(key.substr(start, sep == std::string::npos ? std::string::npos : sep - start)));
    if (sep == std::string::npos) break;
    start = sep + 2;
  }
  if (!kTopKeys.count(path.front())) {
    log::warning("ignoring COLA_" + key + ": not a config key");
    return;
  }
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &root;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const bool last = i + 1 == path.size();
    const auto& seg = path[i];
    if (node->is_array() && is_index(seg)) {
      const auto idx = std::stoul(seg);
      if (idx > node->size()) {
        throw ConfigError("COLA_" + key + ": array index " + seg + " out of range");
      }
      if (idx == node->size()) node->push_back(json::object());
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError("COLA_" + key + ": cannot descend into '" + seg + "'");
      node = &(*node)[seg];
    }
    if (last) *node = value;
  }
}

template <typename T>
T get(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path.lexically_normal().string();
  return (fs::path(base_dir) / path).lexically_normal().string();
}

ModelEndpoint parse_endpoint(const json& j, std::size_t i) {
  const std::string where = "endpoints[" + std::to_string(i) + "]";
  check_keys(j, kEndpointKeys, where);
  ModelEndpoint ep;
  ep.name = get<std::string>(j, "name", "", where);
  ep.base_url = get<std::string>(j, "base_url", "", where);
  for (const auto& c : get<std::vector<std::string>>(j, "capabilities", {}, where)) {
    try {
      ep.capabilities.insert(parse_capability(c));
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  ep.timeout_ms = get(j, "timeout_ms", ep.timeout_ms, where);
  ep.max_retries = get(j, "max_retries", ep.max_retries, where);
  ep.max_concurrency = get(j, "max_concurrency", ep.max_concurrency, where);
  ep.backoff_initial_ms = get(j, "backoff_initial_ms", ep.backoff_initial_ms, where);
  ep.backoff_multiplier = get(j, "backoff_multiplier", ep.backoff_multiplier, where);
  ep.backoff_max_ms = get(j, "backoff_max_ms", ep.backoff_max_ms, where);
  ep.max_prompt_chars = get(j, "max_prompt_chars", ep.max_prompt_chars, where);
  ep.bearer_token = get<std::string>(j, "bearer_token", "", where);
  if (const auto var = get<std::string>(j, "bearer_token_env", "", where); !var.empty()) {
    if (const char* v = std::getenv(var.c_str())) ep.bearer_token = v;
  }
  return ep;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir,
                           const EnvOverrides& env) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  for (const auto& [k, v] : env) apply_override(j, k, v);
  check_keys(j, kTopKeys, "config");

  RunConfig c;
  const std::string where = "config";
  c.task = parse_task(get<std::string>(j, "task", "har", where));
  c.mode = parse_vqa_mode(get<std::string>(j, "mode", "cola", where));
  c.dataset_manifest = resolve(base_dir, get<std::string>(j, "dataset_manifest", "", where));
  c.template_version = get<std::string>(j, "template_version", c.template_version, where);
  c.output_dir = resolve(base_dir, get<std::string>(j, "output_dir", c.output_dir, where));
  c.cache_dir = resolve(base_dir, get<std::string>(j, "cache_dir", "", where));
  c.parallel_videos = get(j, "parallel_videos", c.parallel_videos, where);
  c.seed = get(j, "seed", c.seed, where);
  c.decoder_command = get<std::string>(j, "decoder_command", c.decoder_command, where);
  if (j.contains("instruction")) c.instruction = get<std::string>(j, "instruction", "", where);
  if (j.contains("fps")) c.fps = get<double>(j, "fps", 0.0, where);

  c.selection.kmeans_seed = c.seed;
  if (j.contains("selection")) {
    const auto& s = j["selection"];
    check_keys(s, kSelectionKeys, "selection");
    auto& p = c.selection;
    p.max_keyframes = get(s, "max_keyframes", p.max_keyframes, "selection");
    p.luv_diff_threshold = get(s, "luv_diff_threshold", p.luv_diff_threshold, "selection");
    p.brightness_min = get(s, "brightness_min", p.brightness_min, "selection");
    p.brightness_max = get(s, "brightness_max", p.brightness_max, "selection");
    p.entropy_min = get(s, "entropy_min", p.entropy_min, "selection");
    p.histogram_bins_per_channel =
        get(s, "histogram_bins_per_channel", p.histogram_bins_per_channel, "selection");
    p.kmeans_seed = get(s, "kmeans_seed", p.kmeans_seed, "selection");
    p.kmeans_max_iters = get(s, "kmeans_max_iters", p.kmeans_max_iters, "selection");
    p.kmeans_tol = get(s, "kmeans_tol", p.kmeans_tol, "selection");
    p.kmeans_n_init = get(s, "kmeans_n_init", p.kmeans_n_init, "selection");
  }

  if (j.contains("endpoints")) {
    if (!j["endpoints"].is_array()) throw ConfigError("endpoints must be an array");
    for (std::size_t i = 0; i < j["endpoints"].size(); ++i) {
      c.endpoints.push_back(parse_endpoint(j["endpoints"][i], i));
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path, const EnvOverrides& env) {
  const auto text = read_text(path);
  const auto dir = fs::path(path).parent_path().string();
  try {
    return parse_run_config(text, dir, env);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

void check_id(const std::string& id, const std::string& what) {
  if (id.empty()) throw ConfigError(what + " must be non-empty");
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
      throw ConfigError(what + " '" + id + "' may only contain letters, digits, '-', '_' and '.'");
    }
  }
  if (id == "." || id == "..") throw ConfigError(what + " '" + id + "' is reserved");
}

}  // namespace

DatasetManifest load_manifest(const std::string& path, Task task) {
  const auto text = read_text(path);
  const auto dir = fs::path(path).parent_path().string();
  DatasetManifest m;
  m.task = task;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("manifest root must be an object");
    if (j.contains("task") && parse_task(j["task"].get<std::string>()) != task) {
      throw ConfigError("manifest task '" + j["task"].get<std::string>() +
                        "' does not match the run task '" + std::string(to_string(task)) + "'");
    }
    m.split = j.value("split", "");
    std::set<std::string> ids;
    if (task == Task::kHar) {
      m.class_names = j.at("class_names").get<std::vector<std::string>>();
      if (m.class_names.empty()) throw ConfigError("class_names must be non-empty");
      std::set<std::string> classes(m.class_names.begin(), m.class_names.end());
      if (classes.size() != m.class_names.size()) throw ConfigError("class_names has duplicates");
      for (const auto& row : j.at("items")) {
        HarItem it;
        it.video_id = row.at("video_id").get<std::string>();
        it.source = resolve(dir, row.at("source").get<std::string>());
        it.action_label = row.at("action_label").get<std::string>();
        check_id(it.video_id, "video_id");
        if (!ids.insert(it.video_id).second) throw ConfigError("duplicate video_id '" + it.video_id + "'");
        if (!classes.count(it.action_label)) {
          throw ConfigError("video '" + it.video_id + "': action_label '" + it.action_label +
                            "' is not in class_names");
        }
        m.har_items.push_back(std::move(it));
      }
    } else {
      for (const auto& row : j.at("items")) {
        VqaItem it;
        it.item_id = row.at("item_id").get<std::string>();
        it.image_path = resolve(dir, row.at("image_path").get<std::string>());
        it.question = row.at("question").get<std::string>();
        it.choices = row.at("choices").get<std::vector<std::string>>();
        it.correct_choice_idx = row.at("correct_choice_idx").get<std::size_t>();
        check_id(it.item_id, "item_id");
        if (!ids.insert(it.item_id).second) throw ConfigError("duplicate item_id '" + it.item_id + "'");
        if (it.choices.size() < 2) throw ConfigError("item '" + it.item_id + "' needs at least 2 choices");
        if (it.correct_choice_idx >= it.choices.size()) {
          throw ConfigError("item '" + it.item_id + "': correct_choice_idx out of range");
        }
        m.vqa_items.push_back(std::move(it));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": malformed manifest: " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return m;
}

}  // namespace cola
