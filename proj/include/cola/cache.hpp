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

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cola {

enum class RequestKind { kCaption, kVqa, kGenerate, kEmbed };

std::string_view to_string(RequestKind kind);
RequestKind parse_request_kind(std::string_view name);

struct ModelResponse {
  std::string endpoint_name;
  RequestKind kind = RequestKind::kCaption;
  std::string text;
  std::vector<double> vector;
  double latency_ms = 0.0;
  bool from_cache = false;
  int attempts = 0;  // HTTP attempts spent; 0 for cache hits
};

struct CacheKey {
  std::string endpoint_name;
  RequestKind kind = RequestKind::kCaption;
  std::string digest;  // hex SHA-256 over every request input

  // image_digest is empty for text-only requests.
  static CacheKey make(std::string endpoint_name, RequestKind kind, std::string_view image_digest,
                       std::string_view text, const std::vector<std::string>& choices = {});

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

// Content-addressed response store: one JSON file per key under
// <root>/<endpoint>/<digest[0:2]>/<digest>.json, published by rename so
// concurrent writers never expose a partial entry. An unreadable or
// mismatching entry is reported and treated as a miss.
class ResponseCache {
 public:
  explicit ResponseCache(std::string root);

  const std::string& root() const noexcept { return root_; }

  std::optional<ModelResponse> load(const CacheKey& key);
  void store(const CacheKey& key, const ModelResponse& response);

  // Hit: stored response with from_cache set, thunk not called. Miss: runs
  // the thunk, persists its result and returns it.
  ModelResponse cached_call(const CacheKey& key, const std::function<ModelResponse()>& thunk);

  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }
  std::size_t corrupt_entries() const noexcept { return corrupt_; }

  std::string entry_path(const CacheKey& key) const;

 private:
  std::string root_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> corrupt_{0};
};

}  // namespace cola
