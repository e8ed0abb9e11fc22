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

#include "cola/gateway.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <regex>
#include <thread>

#include <json.hpp>

#include "cola/digest.hpp"
#include "cola/error.hpp"
#include "cola/image_io.hpp"
#include "cola/log.hpp"

using nlohmann::json;

namespace cola {

std::string_view to_string(Capability cap) {
  switch (cap) {
    case Capability::kCaption:
      return "caption";
    case Capability::kVqa:
      return "vqa";
    case Capability::kGenerate:
      return "generate";
    case Capability::kEmbed:
      return "embed";
  }
  return "unknown";
}

Capability parse_capability(std::string_view name) {
  if (name == "caption") return Capability::kCaption;
  if (name == "vqa") return Capability::kVqa;
  if (name == "generate") return Capability::kGenerate;
  if (name == "embed") return Capability::kEmbed;
  throw ConfigError("unknown capability '" + std::string(name) + "'");
}

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // "" or "/segment..."
};

ParsedUrl parse_base_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError("invalid base_url '" + url + "'");
  ParsedUrl p{m[1].str(), m[2].matched ? m[2].str() : ""};
  while (!p.prefix.empty() && p.prefix.back() == '/') p.prefix.pop_back();
  return p;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool retryable_status(int status) { return status >= 500 || status == 429 || status == 408; }

std::string error_body(const std::string& body) {
  try {
    const auto j = json::parse(body);
    if (j.is_object() && j.contains("error") && j["error"].is_string()) {
      return j["error"].get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return body.substr(0, 200);
}

}  // namespace

void ModelEndpoint::validate() const {
  if (name.empty()) throw ConfigError("endpoint name must be non-empty");
  parse_base_url(base_url);
  if (capabilities.empty()) throw ConfigError("endpoint '" + name + "' declares no capabilities");
  if (timeout_ms < 1) throw ConfigError("endpoint '" + name + "': timeout_ms must be >= 1");
  if (max_retries < 0) throw ConfigError("endpoint '" + name + "': max_retries must be >= 0");
  if (max_concurrency < 1) throw ConfigError("endpoint '" + name + "': max_concurrency must be >= 1");
  if (backoff_initial_ms < 0 || backoff_max_ms < 0 || !(backoff_multiplier >= 1.0)) {
    throw ConfigError("endpoint '" + name + "': invalid backoff settings");
  }
}

std::vector<int> backoff_schedule(const ModelEndpoint& endpoint) {
  std::vector<int> out;
  double delay = endpoint.backoff_initial_ms;
  for (int k = 1; k <= endpoint.max_retries; ++k) {
    out.push_back(static_cast<int>(std::min<double>(std::llround(delay), endpoint.backoff_max_ms)));
    delay *= endpoint.backoff_multiplier;
  }
  return out;
}

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

struct Gateway::State {
  std::map<std::string, std::unique_ptr<ConcurrencyLimiter>> limiters;
  std::map<std::string, ParsedUrl> urls;
  std::atomic<std::size_t> network_calls{0};
  std::mutex mu;  // guards the fields below
  std::function<void(const AttemptEvent&)> observer;
  std::function<void(int)> sleeper;
  std::map<std::string, std::size_t> embed_dims;
};

Gateway::Gateway(std::vector<ModelEndpoint> endpoints, std::shared_ptr<ResponseCache> cache)
    : endpoints_(std::move(endpoints)), cache_(std::move(cache)), state_(std::make_unique<State>()) {
  for (const auto& ep : endpoints_) {
    ep.validate();
    if (state_->limiters.count(ep.name)) throw ConfigError("duplicate endpoint name '" + ep.name + "'");
    state_->limiters.emplace(ep.name, std::make_unique<ConcurrencyLimiter>(ep.max_concurrency));
    state_->urls.emplace(ep.name, parse_base_url(ep.base_url));
  }
  state_->sleeper = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

Gateway::~Gateway() = default;

const ModelEndpoint& Gateway::endpoint(const std::string& name) const {
  for (const auto& ep : endpoints_) {
    if (ep.name == name) return ep;
  }
  throw ConfigError("unknown endpoint '" + name + "'");
}

const ModelEndpoint& Gateway::require(const std::string& name, Capability cap) const {
  const auto& ep = endpoint(name);
  if (!ep.has(cap)) {
    throw EndpointError(name, "capability '" + std::string(to_string(cap)) + "' missing");
  }
  return ep;
}

std::vector<std::string> Gateway::endpoints_with(Capability cap) const {
  std::vector<std::string> names;
  for (const auto& ep : endpoints_) {
    if (ep.has(cap)) names.push_back(ep.name);
  }
  return names;
}

std::size_t Gateway::network_calls() const { return state_->network_calls.load(); }

void Gateway::set_attempt_observer(std::function<void(const AttemptEvent&)> observer) {
  std::lock_guard lock(state_->mu);
  state_->observer = std::move(observer);
}

void Gateway::set_sleeper(std::function<void(int)> sleeper) {
  std::lock_guard lock(state_->mu);
  state_->sleeper = std::move(sleeper);
}

ModelResponse Gateway::call(const ModelEndpoint& ep, RequestKind kind, const std::string& path,
                            const std::string& body) {
  auto& limiter = *state_->limiters.at(ep.name);
  const auto& url = state_->urls.at(ep.name);
  const auto schedule = backoff_schedule(ep);
  const int total_attempts = ep.max_retries + 1;
  const auto started = std::chrono::steady_clock::now();

  for (int attempt = 1;; ++attempt) {
    AttemptEvent ev;
    ev.endpoint = ep.name;
    ev.kind = kind;
    ev.attempt = attempt;
    bool retryable = false;
    std::optional<json> payload;
    {
      ConcurrencyLimiter::Permit permit(limiter);
      ++state_->network_calls;
      httplib::Client cli(url.origin);
      const auto secs = ep.timeout_ms / 1000;
      const auto usecs = (ep.timeout_ms % 1000) * 1000;
      cli.set_connection_timeout(secs, usecs);
      cli.set_read_timeout(secs, usecs);
      cli.set_write_timeout(secs, usecs);
      httplib::Headers headers;
      if (!ep.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + ep.bearer_token);
      auto res = cli.Post(url.prefix + path, headers, body, "application/json");
      if (!res) {
        ev.status = -1;
        ev.error = "transport failure: " + httplib::to_string(res.error());
        retryable = true;
      } else {
        ev.status = res->status;
        if (res->status >= 200 && res->status < 300) {
          try {
            payload = json::parse(res->body);
            ev.ok = true;
          } catch (const json::exception&) {
            ev.error = "malformed response body";
          }
        } else {
          ev.error = "HTTP " + std::to_string(res->status) + ": " + error_body(res->body);
          retryable = retryable_status(res->status);
          if (res->status == 413) {
            std::function<void(const AttemptEvent&)> obs;
            {
              std::lock_guard lock(state_->mu);
              obs = state_->observer;
            }
            if (obs) obs(ev);
            throw OversizeError(ep.name, "request rejected as oversize: " + ev.error);
          }
        }
      }
    }
    ev.will_retry = !ev.ok && retryable && attempt < total_attempts;
    if (ev.will_retry) ev.backoff_ms = schedule[static_cast<std::size_t>(attempt - 1)];

    std::function<void(const AttemptEvent&)> observer;
    std::function<void(int)> sleeper;
    {
      std::lock_guard lock(state_->mu);
      observer = state_->observer;
      sleeper = state_->sleeper;
    }
    if (observer) observer(ev);

    if (ev.ok) {
      ModelResponse r;
      r.endpoint_name = ep.name;
      r.kind = kind;
      r.attempts = attempt;
      r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               started)
                         .count();
      const json& j = *payload;
      try {
        if (kind == RequestKind::kEmbed) {
          r.vector = j.at("vector").get<std::vector<double>>();
          if (j.contains("dim") && j["dim"].get<std::size_t>() != r.vector.size()) {
            throw FormatError("dim field disagrees with vector length");
          }
        } else {
          const char* field = kind == RequestKind::kCaption ? "caption"
                              : kind == RequestKind::kVqa   ? "answer"
                                                            : "text";
          r.text = trim(j.at(field).get<std::string>());
        }
      } catch (const std::exception& e) {
        throw EndpointError(ep.name, std::string("malformed response body: ") + e.what());
      }
      if (kind != RequestKind::kEmbed && r.text.empty()) {
        throw EndpointError(ep.name, "empty " + std::string(to_string(kind)) + " response");
      }
      return r;
    }
    if (!ev.will_retry) {
      throw EndpointError(ep.name, std::string(to_string(kind)) + " failed after " +
                                       std::to_string(attempt) + " attempt(s): " + ev.error);
    }
    log::info("[" + ep.name + "] attempt " + std::to_string(attempt) + " failed (" + ev.error +
              "); retrying in " + std::to_string(ev.backoff_ms) + " ms");
    if (sleeper) sleeper(ev.backoff_ms);
  }
}

namespace {

template <typename Thunk>
ModelResponse through_cache(const std::shared_ptr<ResponseCache>& cache, const CacheKey& key,
                            Thunk&& thunk) {
  if (!cache) return thunk();
  return cache->cached_call(key, thunk);
}

std::string image_body(const Frame& image) { return base64_encode(encode_png(image)); }

}  // namespace

ModelResponse Gateway::caption(const std::string& name, const Frame& image) {
  const auto& ep = require(name, Capability::kCaption);
  const auto key = CacheKey::make(name, RequestKind::kCaption, image_digest(image), "");
  return through_cache(cache_, key, [&] {
    json body{{"image_b64", image_body(image)}};
    return call(ep, RequestKind::kCaption, "/v1/caption", body.dump());
  });
}

ModelResponse Gateway::vqa_answer(const std::string& name, const Frame& image,
                                  const std::string& question,
                                  const std::vector<std::string>& choices) {
  const auto& ep = require(name, Capability::kVqa);
  if (trim(question).empty()) throw InvalidArgument("vqa question must be non-empty");
  const auto key = CacheKey::make(name, RequestKind::kVqa, image_digest(image), question, choices);
  return through_cache(cache_, key, [&] {
    json body{{"image_b64", image_body(image)}, {"question", question}};
    if (!choices.empty()) body["choices"] = choices;
    return call(ep, RequestKind::kVqa, "/v1/vqa", body.dump());
  });
}

ModelResponse Gateway::generate(const std::string& name, const std::string& prompt) {
  const auto& ep = require(name, Capability::kGenerate);
  if (trim(prompt).empty()) throw InvalidArgument("generate prompt must be non-empty");
  if (ep.max_prompt_chars > 0 && prompt.size() > ep.max_prompt_chars) {
    throw OversizeError(name, "prompt of " + std::to_string(prompt.size()) +
                                  " chars exceeds the endpoint limit of " +
                                  std::to_string(ep.max_prompt_chars));
  }
  const auto key = CacheKey::make(name, RequestKind::kGenerate, "", prompt);
  return through_cache(cache_, key, [&] {
    json body{{"prompt", prompt}};
    return call(ep, RequestKind::kGenerate, "/v1/generate", body.dump());
  });
}

ModelResponse Gateway::embed_text(const std::string& name, const std::string& text) {
  const auto& ep = require(name, Capability::kEmbed);
  if (trim(text).empty()) throw InvalidArgument("embed text must be non-empty");
  const auto key = CacheKey::make(name, RequestKind::kEmbed, "", text);
  auto r = through_cache(cache_, key, [&] {
    json body{{"text", text}};
    return call(ep, RequestKind::kEmbed, "/v1/embed", body.dump());
  });
  if (r.vector.empty()) throw EndpointError(name, "empty embedding");
  std::lock_guard lock(state_->mu);
  auto [it, inserted] = state_->embed_dims.emplace(name, r.vector.size());
  if (!inserted && it->second != r.vector.size()) {
    throw EndpointError(name, "embedding dimension changed from " + std::to_string(it->second) +
                                  " to " + std::to_string(r.vector.size()));
  }
  return r;
}

Embedding GatewayEmbedder::embed(std::string_view text) {
  return gateway_.embed_text(endpoint_, std::string(text)).vector;
}

}  // namespace cola
