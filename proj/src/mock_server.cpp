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

#include "cola/mock_server.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "cola/digest.hpp"
#include "cola/embedding.hpp"
#include "cola/error.hpp"
#include "cola/image_io.hpp"
#include "cola/templates.hpp"

using nlohmann::json;

namespace cola {

MockFixtures MockFixtures::from_json_text(const std::string& text) {
  MockFixtures f;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw FormatError("fixture root must be an object");
    f.default_answer = j.value("default_answer", f.default_answer);
    f.embed_dim = j.value("embed_dim", f.embed_dim);
    f.generate_rule = j.value("generate_rule", f.generate_rule);
    f.latency_ms = j.value("latency_ms", f.latency_ms);
    f.max_prompt_chars = j.value("max_prompt_chars", f.max_prompt_chars);
    for (const auto& c : j.value("captions", json::array())) {
      f.captions.push_back({c.at("image").get<std::string>(), c.at("caption").get<std::string>(),
                            c.value("scope", "")});
    }
    for (const auto& a : j.value("answers", json::array())) {
      f.answers.push_back({a.at("image").get<std::string>(), a.at("question").get<std::string>(),
                           a.at("answer").get<std::string>(), a.value("scope", "")});
    }
    for (const auto& g : j.value("generations", json::array())) {
      f.generations.push_back({g.at("prompt_sha256").get<std::string>(),
                               g.at("text").get<std::string>(), g.value("scope", "")});
    }
    for (const auto& r : j.value("faults", json::array())) {
      FaultRule rule;
      rule.path = r.value("path", rule.path);
      rule.scope = r.value("scope", rule.scope);
      rule.fail_first = r.value("fail_first", rule.fail_first);
      rule.always = r.value("always", rule.always);
      rule.status = r.value("status", rule.status);
      rule.image = r.value("image", rule.image);
      f.faults.push_back(rule);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed fixtures: ") + e.what());
  }
  if (f.embed_dim < 1) throw FormatError("fixture embed_dim must be >= 1");
  if (f.generate_rule != "first-mentioned-choice" && f.generate_rule != "none") {
    throw FormatError("unknown generate_rule '" + f.generate_rule + "'");
  }
  return f;
}

MockFixtures MockFixtures::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read fixtures " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return from_json_text(text);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string MockFixtures::to_json_text() const {
  json j;
  j["default_answer"] = default_answer;
  j["embed_dim"] = embed_dim;
  j["generate_rule"] = generate_rule;
  j["latency_ms"] = latency_ms;
  j["max_prompt_chars"] = max_prompt_chars;
  auto scoped = [](json e, const std::string& scope) {
    if (!scope.empty()) e["scope"] = scope;
    return e;
  };
  j["captions"] = json::array();
  for (const auto& c : captions) {
    j["captions"].push_back(scoped({{"image", c.image}, {"caption", c.caption}}, c.scope));
  }
  j["answers"] = json::array();
  for (const auto& a : answers) {
    j["answers"].push_back(
        scoped({{"image", a.image}, {"question", a.question}, {"answer", a.answer}}, a.scope));
  }
  j["generations"] = json::array();
  for (const auto& g : generations) {
    j["generations"].push_back(scoped({{"prompt_sha256", g.prompt_sha256}, {"text", g.text}}, g.scope));
  }
  j["faults"] = json::array();
  for (const auto& r : faults) {
    json rule{{"path", r.path},
              {"scope", r.scope},
              {"fail_first", r.fail_first},
              {"always", r.always},
              {"status", r.status}};
    if (!r.image.empty()) rule["image"] = r.image;
    j["faults"].push_back(rule);
  }
  return j.dump(2) + "\n";
}

namespace {

// Alphabetically first choice mentioned in the context/answer lines.
std::optional<std::string> first_mentioned_choice(const std::string& prompt) {
  std::vector<std::string> choices;
  std::string body;
  std::size_t start = 0;
  while (start <= prompt.size()) {
    auto nl = prompt.find('\n', start);
    if (nl == std::string::npos) nl = prompt.size();
    const std::string_view line(prompt.data() + start, nl - start);
    if (line.substr(0, 9) == "Choices: ") {
      try {
        choices = parse_choices(line.substr(9));
      } catch (const FormatError&) {
        return std::nullopt;
      }
    } else if (line.substr(0, 9) == "Context [" || line.substr(0, 18) == "Plausible answer [") {
      const auto close = line.find("]: ");
      if (close != std::string_view::npos) {
        body += ' ';
        body += line.substr(close + 3);
      }
    }
    start = nl + 1;
  }
  const std::string folded = " " + fold_text(body) + " ";
  std::optional<std::string> best;
  for (const auto& c : choices) {
    const auto fc = fold_text(c);
    if (fc.empty() || folded.find(" " + fc + " ") == std::string::npos) continue;
    if (!best || c < *best) best = c;
  }
  return best;
}

struct FaultState {
  FaultRule rule;
  int seen = 0;
};

}  // namespace

struct MockServer::Impl {
  MockFixtures fixtures;
  std::map<std::pair<std::string, std::string>, std::string> captions;  // (scope, digest)
  std::map<std::tuple<std::string, std::string, std::string>, std::string> answers;
  std::map<std::pair<std::string, std::string>, std::string> generations;

  httplib::Server server;
  std::thread thread;
  int bound_port = -1;

  mutable std::mutex mu;
  std::vector<FaultState> faults;
  std::map<std::string, std::size_t> counts;
  std::atomic<int> in_flight{0};
  std::atomic<int> max_in_flight{0};
  std::atomic<int> latency_ms{0};

  explicit Impl(MockFixtures f) : fixtures(std::move(f)) {
    for (const auto& c : fixtures.captions) captions[{c.scope, c.image}] = c.caption;
    for (const auto& a : fixtures.answers) answers[{a.scope, a.image, a.question}] = a.answer;
    for (const auto& g : fixtures.generations) generations[{g.scope, g.prompt_sha256}] = g.text;
    for (const auto& r : fixtures.faults) faults.push_back({r, 0});
    latency_ms = fixtures.latency_ms;
    // SO_REUSEADDR only: httplib's default SO_REUSEPORT lets a second server share the port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    install_routes();
  }

  template <typename Map, typename Key>
  std::optional<std::string> lookup(const Map& m, Key scoped, Key any) const {
    if (auto it = m.find(scoped); it != m.end()) return it->second;
    if (auto it = m.find(any); it != m.end()) return it->second;
    return std::nullopt;
  }

  std::optional<int> injected_fault(const std::string& kind, const std::string& scope,
                                    const std::string& image) {
    std::lock_guard lock(mu);
    for (auto& f : faults) {
      if (f.rule.path != "*" && f.rule.path != kind) continue;
      if (f.rule.scope != "*" && f.rule.scope != scope) continue;
      if (!f.rule.image.empty() && f.rule.image != image) continue;
      ++f.seen;
      if (f.rule.always || f.seen <= f.rule.fail_first) return f.rule.status;
    }
    return std::nullopt;
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static Frame decode_image(const json& body) {
    const auto b64 = body.at("image_b64").get<std::string>();
    return decode_png(base64_decode(b64));
  }

  void handle(const std::string& scope, const std::string& kind, const httplib::Request& req,
              httplib::Response& res) {
    const int now = ++in_flight;
    int prev = max_in_flight.load();
    while (now > prev && !max_in_flight.compare_exchange_weak(prev, now)) {
    }
    struct Leave {
      std::atomic<int>& n;
      ~Leave() { --n; }
    } leave{in_flight};
    {
      std::lock_guard lock(mu);
      ++counts[kind];
    }
    if (const int ms = latency_ms.load(); ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
    json body;
    bool parsed = true;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      parsed = false;
    }
    std::string fault_image;
    if (parsed && body.is_object() && body.contains("image_b64")) {
      try {
        fault_image = image_digest(decode_image(body));
      } catch (const std::exception&) {
      }
    }
    if (auto status = injected_fault(kind, scope, fault_image)) {
      reply(res, *status, {{"error", "injected fault"}});
      return;
    }
    if (!parsed) {
      reply(res, 400, {{"error", "request body is not JSON"}});
      return;
    }
    try {
      if (kind == "caption") {
        const auto digest = image_digest(decode_image(body));
        const auto text = lookup(captions, std::pair{scope, digest}, std::pair{std::string(), digest});
        reply(res, 200, {{"caption", text.value_or(fixtures.default_answer)}});
      } else if (kind == "vqa") {
        const auto digest = image_digest(decode_image(body));
        const auto question = body.at("question").get<std::string>();
        const auto text = lookup(answers, std::tuple{scope, digest, question},
                                 std::tuple{std::string(), digest, question});
        reply(res, 200, {{"answer", text.value_or(fixtures.default_answer)}});
      } else if (kind == "generate") {
        const auto prompt = body.at("prompt").get<std::string>();
        if (fixtures.max_prompt_chars > 0 && prompt.size() > fixtures.max_prompt_chars) {
          reply(res, 413, {{"error", "prompt exceeds " + std::to_string(fixtures.max_prompt_chars) +
                                         " characters"}});
          return;
        }
        const auto digest = sha256_hex(prompt);
        auto text = lookup(generations, std::pair{scope, digest}, std::pair{std::string(), digest});
        if (!text && fixtures.generate_rule == "first-mentioned-choice") {
          text = first_mentioned_choice(prompt);
        }
        reply(res, 200, {{"text", text.value_or(fixtures.default_answer)}});
      } else {
        const auto text = body.at("text").get<std::string>();
        const auto vec = trigram_embedding(text, fixtures.embed_dim);
        reply(res, 200, {{"vector", vec}, {"dim", vec.size()}});
      }
    } catch (const std::exception& e) {
      reply(res, 400, {{"error", e.what()}});
    }
  }

  void install_routes() {
    server.Get(R"(/(?:[^/]+/)?v1/health)", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"ok", true}});
    });
    server.Post(R"(/(?:([^/]+)/)?v1/(caption|vqa|generate|embed))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  const std::string scope = req.matches[1].matched ? req.matches[1].str() : "";
                  handle(scope, req.matches[2].str(), req, res);
                });
  }
};

MockServer::MockServer(MockFixtures fixtures) : impl_(std::make_unique<Impl>(std::move(fixtures))) {}

MockServer::~MockServer() { stop(); }

int MockServer::start(int port, const std::string& host) {
  if (impl_->thread.joinable()) throw Error("mock server already started");
  if (port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->bound_port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->bound_port < 0) {
    throw IoError("cannot bind mock server to " + host + ":" + std::to_string(port) +
                  " (port busy?)");
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  for (int i = 0; i < 500 && !impl_->server.is_running(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return impl_->bound_port;
}

void MockServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

int MockServer::port() const { return impl_->bound_port; }

std::string MockServer::base_url(const std::string& scope) const {
  std::string url = "http://127.0.0.1:" + std::to_string(impl_->bound_port);
  if (!scope.empty()) url += "/" + scope;
  return url;
}

std::size_t MockServer::request_count() const {
  std::lock_guard lock(impl_->mu);
  std::size_t n = 0;
  for (const auto& [_, c] : impl_->counts) n += c;
  return n;
}

std::size_t MockServer::request_count(const std::string& kind) const {
  std::lock_guard lock(impl_->mu);
  auto it = impl_->counts.find(kind);
  return it == impl_->counts.end() ? 0 : it->second;
}

int MockServer::max_in_flight() const { return impl_->max_in_flight.load(); }

void MockServer::reset_counters() {
  std::lock_guard lock(impl_->mu);
  impl_->counts.clear();
  impl_->max_in_flight = 0;
  for (auto& f : impl_->faults) f.seen = 0;
}

void MockServer::set_faults(std::vector<FaultRule> faults) {
  std::lock_guard lock(impl_->mu);
  impl_->faults.clear();
  for (auto& r : faults) impl_->faults.push_back({std::move(r), 0});
}

void MockServer::set_latency_ms(int ms) { impl_->latency_ms = ms; }

}  // namespace cola
