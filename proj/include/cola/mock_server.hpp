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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cola {

// Scripted failures. `path` is a request kind ("caption", "vqa", "generate",
// "embed") or "*"; `scope` is the first URL path segment in front of /v1/
// (how several logical endpoints share one server) or "*".
struct FaultRule {
  std::string path = "*";
  std::string scope = "*";
  int fail_first = 0;   // fail this many matching requests, then succeed
  bool always = false;  // fail every matching request
  int status = 503;
  std::string image;  // image_digest() hex; empty: any request
};

struct MockFixtures {
  std::string default_answer = "unknown";
  int embed_dim = 256;
  // "first-mentioned-choice": among the Choices of a cola-v1 prompt, answer
  // the alphabetically first one mentioned in any Context or Plausible answer
  // line. "none": only exact prompt fixtures, else default_answer.
  std::string generate_rule = "first-mentioned-choice";
  int latency_ms = 0;
  std::size_t max_prompt_chars = 0;

  struct Caption {
    std::string image;  // image_digest() hex
    std::string caption;
    std::string scope;  // empty: any
  };
  struct Answer {
    std::string image;
    std::string question;
    std::string answer;
    std::string scope;
  };
  struct Generation {
    std::string prompt_sha256;
    std::string text;
    std::string scope;
  };
  std::vector<Caption> captions;
  std::vector<Answer> answers;
  std::vector<Generation> generations;
  std::vector<FaultRule> faults;

  static MockFixtures from_json_text(const std::string& text);
  static MockFixtures load(const std::string& path);
  std::string to_json_text() const;
};

// Deterministic in-process model server speaking the gateway wire protocol:
//   POST [/<scope>]/v1/caption | /v1/vqa | /v1/generate | /v1/embed
//   GET  [/<scope>]/v1/health -> {"ok": true}
// Embeddings are the hashed character-trigram vectors of embedding.hpp.
class MockServer {
 public:
  explicit MockServer(MockFixtures fixtures);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws IoError when the port is taken.
  int start(int port = 0, const std::string& host = "127.0.0.1");
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  int port() const;
  std::string base_url(const std::string& scope = {}) const;

  // Model requests served (health checks excluded).
  std::size_t request_count() const;
  std::size_t request_count(const std::string& kind) const;
  int max_in_flight() const;
  void reset_counters();

  void set_faults(std::vector<FaultRule> faults);
  void set_latency_ms(int ms);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cola
