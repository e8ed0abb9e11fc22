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

#include "cola/cache.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cola/digest.hpp"
#include "cola/error.hpp"
#include "cola/log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cola {

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::kCaption:
      return "caption";
    case RequestKind::kVqa:
      return "vqa";
    case RequestKind::kGenerate:
      return "generate";
    case RequestKind::kEmbed:
      return "embed";
  }
  return "unknown";
}

RequestKind parse_request_kind(std::string_view name) {
  if (name == "caption") return RequestKind::kCaption;
  if (name == "vqa") return RequestKind::kVqa;
  if (name == "generate") return RequestKind::kGenerate;
  if (name == "embed") return RequestKind::kEmbed;
  throw FormatError("unknown request kind '" + std::string(name) + "'");
}

namespace {

// Length-prefixed fields keep the encoding injective.
void put_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
}

std::string sanitize(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string temp_suffix() {
  thread_local std::mt19937_64 rng{std::random_device{}() ^
                                   static_cast<std::uint64_t>(::getpid()) << 32};
  std::ostringstream s;
  s << ".tmp." << std::hex << rng();
  return s.str();
}

}  // namespace

CacheKey CacheKey::make(std::string endpoint_name, RequestKind kind, std::string_view image_digest,
                        std::string_view text, const std::vector<std::string>& choices) {
  std::string material = "cola-cache-v1";
  put_field(material, endpoint_name);
  put_field(material, to_string(kind));
  put_field(material, image_digest);
  put_field(material, text);
  material += std::to_string(choices.size()) + "#";
  for (const auto& c : choices) put_field(material, c);
  return CacheKey{std::move(endpoint_name), kind, sha256_hex(material)};
}

ResponseCache::ResponseCache(std::string root) : root_(std::move(root)) {
  if (root_.empty()) throw InvalidArgument("cache root must be non-empty");
}

std::string ResponseCache::entry_path(const CacheKey& key) const {
  return (fs::path(root_) / sanitize(key.endpoint_name) / key.digest.substr(0, 2) /
          (key.digest + ".json"))
      .string();
}

std::optional<ModelResponse> ResponseCache::load(const CacheKey& key) {
  const auto path = entry_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.at("key").get<std::string>() != key.digest ||
        j.at("endpoint").get<std::string>() != key.endpoint_name ||
        parse_request_kind(j.at("kind").get<std::string>()) != key.kind) {
      throw FormatError("key mismatch");
    }
    ModelResponse r;
    r.endpoint_name = key.endpoint_name;
    r.kind = key.kind;
    if (key.kind == RequestKind::kEmbed) {
      r.vector = j.at("vector").get<std::vector<double>>();
      if (r.vector.empty()) throw FormatError("empty vector");
    } else {
      r.text = j.at("text").get<std::string>();
    }
    r.from_cache = true;
    return r;
  } catch (const std::exception& e) {
    ++corrupt_;
    log::warning("corrupt cache entry " + path + " (" + e.what() + "); treating as miss");
    return std::nullopt;
  }
}

void ResponseCache::store(const CacheKey& key, const ModelResponse& response) {
  const fs::path path = entry_path(key);
  json j;
  j["key"] = key.digest;
  j["endpoint"] = key.endpoint_name;
  j["kind"] = std::string(to_string(key.kind));
  if (key.kind == RequestKind::kEmbed) {
    j["vector"] = response.vector;
  } else {
    j["text"] = response.text;
  }
  const std::string body = j.dump() + "\n";

  // A second attempt covers the directory vanishing between mkdir and rename.
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + temp_suffix();
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) continue;
      out << body;
      out.close();
      if (!out) {
        fs::remove(tmp, ec);
        continue;
      }
    }
    fs::rename(tmp, path, ec);
    if (!ec) return;
    fs::remove(tmp, ec);
  }
  throw IoError("cannot publish cache entry " + path.string());
}

ModelResponse ResponseCache::cached_call(const CacheKey& key,
                                         const std::function<ModelResponse()>& thunk) {
  if (auto hit = load(key)) {
    ++hits_;
    return *hit;
  }
  ++misses_;
  ModelResponse fresh = thunk();
  fresh.from_cache = false;
  store(key, fresh);
  return fresh;
}

}  // namespace cola
