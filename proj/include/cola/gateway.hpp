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

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "cola/cache.hpp"
#include "cola/embedding.hpp"
#include "cola/frame.hpp"

namespace cola {

enum class Capability { kCaption, kVqa, kGenerate, kEmbed };

std::string_view to_string(Capability cap);
Capability parse_capability(std::string_view name);

struct ModelEndpoint {
  std::string name;
  std::string base_url;  // scheme://host[:port][/prefix]
  std::set<Capability> capabilities;
  int timeout_ms = 30000;
  int max_retries = 3;
  int max_concurrency = 4;
  int backoff_initial_ms = 200;
  double backoff_multiplier = 2.0;
  int backoff_max_ms = 10000;
  std::size_t max_prompt_chars = 0;  // 0: no limit
  std::string bearer_token;

  bool has(Capability cap) const { return capabilities.count(cap) != 0; }
  void validate() const;
};

// Delay before retry k (k = 1..max_retries): initial * multiplier^(k-1),
// capped at backoff_max_ms.
std::vector<int> backoff_schedule(const ModelEndpoint& endpoint);

struct AttemptEvent {
  std::string endpoint;
  RequestKind kind = RequestKind::kCaption;
  int attempt = 0;    // 1-based
  int status = 0;     // HTTP status, or -1 for transport failure
  bool ok = false;
  bool will_retry = false;
  int backoff_ms = 0;  // sleep before the next attempt
  std::string error;
};

// Counting semaphore bounding in-flight requests to one endpoint.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int permits) : available_(permits) {}

  void acquire();
  void release();

  class Permit {
   public:
    explicit Permit(ConcurrencyLimiter& l) : limiter_(l) { limiter_.acquire(); }
    ~Permit() { limiter_.release(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    ConcurrencyLimiter& limiter_;
  };

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

// Cached, retrying client over the JSON wire protocol. Safe for concurrent use.
class Gateway {
 public:
  // cache may be null, in which case every call goes to the network.
  Gateway(std::vector<ModelEndpoint> endpoints, std::shared_ptr<ResponseCache> cache);
  ~Gateway();

  ModelResponse caption(const std::string& endpoint, const Frame& image);
  ModelResponse vqa_answer(const std::string& endpoint, const Frame& image,
                           const std::string& question, const std::vector<std::string>& choices = {});
  ModelResponse generate(const std::string& endpoint, const std::string& prompt);
  ModelResponse embed_text(const std::string& endpoint, const std::string& text);

  const ModelEndpoint& endpoint(const std::string& name) const;
  const std::vector<ModelEndpoint>& endpoints() const noexcept { return endpoints_; }
  std::vector<std::string> endpoints_with(Capability cap) const;

  // HTTP attempts issued so far, across all endpoints.
  std::size_t network_calls() const;

  void set_attempt_observer(std::function<void(const AttemptEvent&)> observer);
  // Replaces the backoff sleep; tests use it to record the schedule.
  void set_sleeper(std::function<void(int)> sleeper);

 private:
  struct State;

  ModelResponse call(const ModelEndpoint& ep, RequestKind kind, const std::string& path,
                     const std::string& body);
  const ModelEndpoint& require(const std::string& name, Capability cap) const;

  std::vector<ModelEndpoint> endpoints_;
  std::shared_ptr<ResponseCache> cache_;
  std::unique_ptr<State> state_;
};

// Embeds through a gateway endpoint with the embed capability.
class GatewayEmbedder final : public TextEmbedder {
 public:
  GatewayEmbedder(Gateway& gateway, std::string endpoint)
      : gateway_(gateway), endpoint_(std::move(endpoint)) {}
  Embedding embed(std::string_view text) override;

 private:
  Gateway& gateway_;
  std::string endpoint_;
};

}  // namespace cola
