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

#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

#include "cola/cache.hpp"
#include "cola/digest.hpp"
#include "cola/embedding.hpp"
#include "cola/ensemble.hpp"
#include "cola/error.hpp"
#include "cola/gateway.hpp"
#include "cola/mock_server.hpp"
#include "support.hpp"

using namespace cola;

namespace {

ModelEndpoint endpoint(const std::string& name, const std::string& url, std::set<Capability> caps) {
  ModelEndpoint ep;
  ep.name = name;
  ep.base_url = url;
  ep.capabilities = std::move(caps);
  ep.backoff_initial_ms = 1;
  ep.timeout_ms = 5000;
  return ep;
}

const std::set<Capability> kAll{Capability::kCaption, Capability::kVqa, Capability::kGenerate,
                                Capability::kEmbed};

int free_port() {
  MockServer probe(MockFixtures{});
  const int port = probe.start();
  probe.stop();
  return port;
}

struct Recorder {
  std::mutex mu;
  std::vector<AttemptEvent> events;
  std::vector<int> sleeps;

  void attach(Gateway& g) {
    g.set_attempt_observer([this](const AttemptEvent& e) {
      std::lock_guard lock(mu);
      events.push_back(e);
    });
    g.set_sleeper([this](int ms) {
      std::lock_guard lock(mu);
      sleeps.push_back(ms);
    });
  }
};

}  // namespace

TEST_SUITE("model-gateway") {
  TEST_CASE("backoff schedule follows the configuration exactly") {
    ModelEndpoint ep;
    CHECK(backoff_schedule(ep) == std::vector<int>{200, 400, 800});
    ep.max_retries = 6;
    ep.backoff_initial_ms = 1000;
    ep.backoff_multiplier = 3;
    ep.backoff_max_ms = 20000;
    CHECK(backoff_schedule(ep) == std::vector<int>{1000, 3000, 9000, 20000, 20000, 20000});
    ep.max_retries = 0;
    CHECK(backoff_schedule(ep).empty());
  }

  TEST_CASE("endpoint validation") {
    auto ep = endpoint("a", "http://127.0.0.1:1", {Capability::kCaption});
    CHECK_NOTHROW(ep.validate());
    ep.max_concurrency = 0;
    CHECK_THROWS_AS(ep.validate(), ConfigError);
    ep = endpoint("", "http://127.0.0.1:1", {Capability::kCaption});
    CHECK_THROWS_AS(ep.validate(), ConfigError);
    ep = endpoint("a", "ftp://x", {Capability::kCaption});
    CHECK_THROWS(ep.validate());
    ep = endpoint("a", "http://127.0.0.1:1", {});
    CHECK_THROWS_AS(ep.validate(), ConfigError);
    CHECK_THROWS_AS(Gateway({endpoint("a", "http://h:1", kAll), endpoint("a", "http://h:2", kAll)}, nullptr),
                    ConfigError);
  }

  TEST_CASE("cache keys are equal for equal inputs and differ on any byte") {
    const auto base = CacheKey::make("ep", RequestKind::kVqa, "d1", "q", {"a", "b"});
    CHECK(base == CacheKey::make("ep", RequestKind::kVqa, "d1", "q", {"a", "b"}));
    CHECK_FALSE(base == CacheKey::make("ep2", RequestKind::kVqa, "d1", "q", {"a", "b"}));
    CHECK_FALSE(base == CacheKey::make("ep", RequestKind::kCaption, "d1", "q", {"a", "b"}));
    CHECK_FALSE(base == CacheKey::make("ep", RequestKind::kVqa, "d2", "q", {"a", "b"}));
    CHECK_FALSE(base == CacheKey::make("ep", RequestKind::kVqa, "d1", "q ", {"a", "b"}));
    CHECK_FALSE(base == CacheKey::make("ep", RequestKind::kVqa, "d1", "q", {"a", "b "}));
    CHECK_FALSE(base == CacheKey::make("ep", RequestKind::kVqa, "d1", "q", {"ab"}));
    CHECK_FALSE(CacheKey::make("e", RequestKind::kVqa, "", "q", {"ab", "c"}) ==
                CacheKey::make("e", RequestKind::kVqa, "", "q", {"a", "bc"}));
    CHECK_FALSE(CacheKey::make("e", RequestKind::kGenerate, "", "ab") ==
                CacheKey::make("e", RequestKind::kGenerate, "a", "b"));
    CHECK(base.digest.size() == 64);
  }

  TEST_CASE("cached_call: miss then hit runs the thunk once") {
    test::TempDir dir;
    ResponseCache cache(dir.str());
    const auto key = CacheKey::make("ep", RequestKind::kGenerate, "", "hello");
    int calls = 0;
    auto thunk = [&] {
      ++calls;
      ModelResponse r;
      r.endpoint_name = "ep";
      r.kind = RequestKind::kGenerate;
      r.text = "world";
      r.attempts = 1;
      return r;
    };
    const auto a = cache.cached_call(key, thunk);
    const auto b = cache.cached_call(key, thunk);
    CHECK(calls == 1);
    CHECK_FALSE(a.from_cache);
    CHECK(b.from_cache);
    CHECK(b.text == "world");
    CHECK(b.attempts == 0);
    CHECK(cache.hits() == 1);
    CHECK(cache.misses() == 1);
    CHECK(std::filesystem::exists(cache.entry_path(key)));
  }

  TEST_CASE("corrupt entries are misses and get rewritten") {
    test::TempDir dir;
    ResponseCache cache(dir.str());
    const auto key = CacheKey::make("ep", RequestKind::kCaption, "d", "");
    ModelResponse r;
    r.endpoint_name = "ep";
    r.text = "fine";
    cache.store(key, r);
    test::write_file(cache.entry_path(key), "{ not json");
    CHECK_FALSE(cache.load(key));
    CHECK(cache.corrupt_entries() == 1);
    int calls = 0;
    const auto again = cache.cached_call(key, [&] {
      ++calls;
      return r;
    });
    CHECK(calls == 1);
    CHECK(again.text == "fine");
    REQUIRE(cache.load(key));
    CHECK(cache.load(key)->text == "fine");
  }

  TEST_CASE("deleting the cache directory mid-run repopulates it") {
    test::TempDir dir;
    ResponseCache cache(dir / "cache");
    const auto key = CacheKey::make("ep", RequestKind::kEmbed, "", "x");
    ModelResponse r;
    r.kind = RequestKind::kEmbed;
    r.vector = {0.6, 0.8};
    cache.store(key, r);
    std::filesystem::remove_all(dir / "cache");
    int calls = 0;
    const auto back = cache.cached_call(key, [&] {
      ++calls;
      return r;
    });
    CHECK(calls == 1);
    CHECK(back.vector == r.vector);
    CHECK(cache.load(key));
  }

  TEST_CASE("racing writers leave one valid entry") {
    test::TempDir dir;
    ResponseCache cache(dir.str());
    const auto key = CacheKey::make("ep", RequestKind::kGenerate, "", "race");
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 20; ++i) {
          ModelResponse r;
          r.kind = RequestKind::kGenerate;
          r.text = "writer " + std::to_string(t);
          cache.store(key, r);
        }
      });
    }
    for (auto& th : threads) th.join();
    const auto got = cache.load(key);
    REQUIRE(got);
    CHECK(got->text.rfind("writer ", 0) == 0);
    CHECK(cache.corrupt_entries() == 0);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path())) files += e.is_regular_file();
    CHECK(files == 1);
  }

  TEST_CASE("trigram embedder") {
    const auto a = trigram_embedding("walk");
    CHECK(a.size() == 256);
    CHECK(a == trigram_embedding("walk"));
    CHECK(a == trigram_embedding("  WALK "));
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    const auto run = trigram_embedding("running");
    CHECK(cosine_similarity(run, trigram_embedding("running fast")) >
          cosine_similarity(run, trigram_embedding("blue umbrella")));
    double norm = 0;
    for (double x : run) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("digests and base64") {
    CHECK(sha256_hex(std::string_view("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(base64_encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}) == "Zm9vYg==");
    for (std::size_t n = 0; n < 10; ++n) {
      std::vector<std::uint8_t> bytes(n);
      for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(i * 37 + 1);
      CHECK(base64_decode(base64_encode(bytes)) == bytes);
    }
    auto f = solid_frame(2, 2, 1, 2, 3);
    const auto d = image_digest(f);
    f.pixels[0] = 9;
    CHECK(image_digest(f) != d);
  }
}

TEST_SUITE("mock-server") {
  TEST_CASE("fixture echo, cache hit and unknown fallback") {
    const auto img = solid_frame(4, 4, 10, 20, 30);
    const auto other = solid_frame(4, 4, 30, 20, 10);
    MockFixtures fx;
    fx.captions.push_back({image_digest(img), "a person walking", ""});
    fx.answers.push_back({image_digest(img), "What?", "walking", ""});
    MockServer server(fx);
    server.start();
    test::TempDir dir;
    Gateway g({endpoint("m", server.base_url(), kAll)}, std::make_shared<ResponseCache>(dir.str()));

    const auto first = g.caption("m", img);
    CHECK(first.text == "a person walking");
    CHECK_FALSE(first.from_cache);
    const auto calls = g.network_calls();
    const auto second = g.caption("m", img);
    CHECK(second.text == "a person walking");
    CHECK(second.from_cache);
    CHECK(g.network_calls() == calls);
    CHECK(server.request_count("caption") == 1);

    CHECK(g.vqa_answer("m", img, "What?").text == "walking");
    CHECK(g.vqa_answer("m", img, "Who?").text == "unknown");
    CHECK(g.caption("m", other).text == "unknown");
  }

  TEST_CASE("health endpoint") {
    MockServer server(MockFixtures{});
    const int port = server.start();
    httplib::Client cli("127.0.0.1", port);
    auto res = cli.Get("/v1/health");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == R"({"ok":true})");
    auto scoped = cli.Get("/vlm-a/v1/health");
    REQUIRE(scoped);
    CHECK(scoped->status == 200);
    CHECK(server.request_count() == 0);
  }

  TEST_CASE("scoped fixtures take precedence") {
    const auto img = solid_frame(3, 3, 1, 1, 1);
    MockFixtures fx;
    fx.captions.push_back({image_digest(img), "generic", ""});
    fx.captions.push_back({image_digest(img), "special", "b"});
    MockServer server(fx);
    server.start();
    Gateway g({endpoint("a", server.base_url("a"), kAll), endpoint("b", server.base_url("b"), kAll)}, nullptr);
    CHECK(g.caption("a", img).text == "generic");
    CHECK(g.caption("b", img).text == "special");
  }

  TEST_CASE("down endpoint fails after max_retries + 1 attempts with the configured backoff") {
    auto ep = endpoint("down", "http://127.0.0.1:" + std::to_string(free_port()), kAll);
    ep.max_retries = 3;
    ep.backoff_initial_ms = 100;
    ep.backoff_multiplier = 2;
    Gateway g({ep}, nullptr);
    Recorder rec;
    rec.attach(g);
    try {
      g.caption("down", solid_frame(2, 2, 0, 0, 0));
      FAIL("expected failure");
    } catch (const EndpointError& e) {
      CHECK(e.endpoint() == "down");
      CHECK(std::string(e.what()).find("after 4 attempt(s)") != std::string::npos);
    }
    CHECK(rec.events.size() == 4);
    CHECK(rec.sleeps == std::vector<int>{100, 200, 400});
    CHECK(g.network_calls() == 4);
    for (const auto& e : rec.events) CHECK(e.status == -1);
  }

  TEST_CASE("transient failures are retried until success") {
    const auto img = solid_frame(2, 2, 5, 5, 5);
    MockFixtures fx;
    fx.captions.push_back({image_digest(img), "ok", ""});
    fx.faults.push_back({"caption", "*", 2, false, 503});
    MockServer server(fx);
    server.start();
    Gateway g({endpoint("m", server.base_url(), kAll)}, nullptr);
    Recorder rec;
    rec.attach(g);
    const auto r = g.caption("m", img);
    CHECK(r.text == "ok");
    CHECK(r.attempts == 3);
    REQUIRE(rec.events.size() == 3);
    CHECK(rec.events[0].status == 503);
    CHECK(rec.events[0].will_retry);
    CHECK(rec.events[2].ok);
    CHECK(rec.sleeps == std::vector<int>{1, 2});
  }

  TEST_CASE("client errors are not retried, 429 is") {
    MockFixtures fx;
    fx.faults.push_back({"generate", "*", 0, true, 400});
    fx.faults.push_back({"embed", "*", 1, false, 429});
    MockServer server(fx);
    server.start();
    Gateway g({endpoint("m", server.base_url(), kAll)}, nullptr);
    Recorder rec;
    rec.attach(g);
    CHECK_THROWS_AS(g.generate("m", "hello"), EndpointError);
    CHECK(rec.events.size() == 1);
    CHECK(g.embed_text("m", "hi").attempts == 2);
  }

  TEST_CASE("oversize prompts are rejected, never truncated") {
    MockFixtures fx;
    fx.max_prompt_chars = 10;
    MockServer server(fx);
    server.start();
    Gateway g({endpoint("m", server.base_url(), kAll)}, nullptr);
    CHECK_THROWS_AS(g.generate("m", std::string(11, 'x')), OversizeError);
    CHECK(g.generate("m", "short").text == "unknown");

    auto limited = endpoint("l", server.base_url(), kAll);
    limited.max_prompt_chars = 4;
    Gateway lg({limited}, nullptr);
    CHECK_THROWS_AS(lg.generate("l", "toolong"), OversizeError);
    CHECK(lg.network_calls() == 0);
  }

  TEST_CASE("preconditions and capability checks") {
    MockServer server(MockFixtures{});
    server.start();
    Gateway g({endpoint("cap", server.base_url(), {Capability::kCaption})}, nullptr);
    CHECK_THROWS_AS(g.generate("cap", "x"), EndpointError);
    CHECK_THROWS_AS(g.caption("nope", solid_frame(2, 2, 0, 0, 0)), ConfigError);
    Gateway full({endpoint("f", server.base_url(), kAll)}, nullptr);
    CHECK_THROWS_AS(full.generate("f", "   "), InvalidArgument);
    CHECK_THROWS_AS(full.vqa_answer("f", solid_frame(2, 2, 0, 0, 0), ""), InvalidArgument);
    CHECK_THROWS_AS(full.embed_text("f", ""), InvalidArgument);
    CHECK(full.network_calls() == 0);
  }

  TEST_CASE("blank text responses are errors") {
    const auto img = solid_frame(2, 2, 9, 9, 9);
    MockFixtures fx;
    fx.captions.push_back({image_digest(img), "   ", ""});
    MockServer server(fx);
    server.start();
    Gateway g({endpoint("m", server.base_url(), kAll)}, nullptr);
    CHECK_THROWS_AS(g.caption("m", img), EndpointError);
  }

  TEST_CASE("malformed bodies and changing embedding sizes are errors") {
    httplib::Server raw;
    raw.Post("/v1/caption", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "application/json");
    });
    std::atomic<int> dim{4};
    raw.Post("/v1/embed", [&](const httplib::Request&, httplib::Response& res) {
      const int d = dim.fetch_add(1);
      nlohmann::json j{{"vector", std::vector<double>(static_cast<std::size_t>(d), 0.5)}};
      res.set_content(j.dump(), "application/json");
    });
    const int port = raw.bind_to_any_port("127.0.0.1");
    std::thread t([&] { raw.listen_after_bind(); });
    while (!raw.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    Gateway g({endpoint("r", "http://127.0.0.1:" + std::to_string(port), kAll)}, nullptr);
    CHECK_THROWS_AS(g.caption("r", solid_frame(2, 2, 0, 0, 0)), EndpointError);
    CHECK(g.embed_text("r", "a").vector.size() == 4);
    CHECK_THROWS_AS(g.embed_text("r", "b"), EndpointError);
    raw.stop();
    t.join();
  }

  TEST_CASE("mock embedder is the trigram embedder") {
    MockServer server(MockFixtures{});
    server.start();
    Gateway g({endpoint("m", server.base_url(), kAll)}, nullptr);
    GatewayEmbedder emb(g, "m");
    const auto v = emb.embed("walk");
    const auto local = trigram_embedding("walk");
    REQUIRE(v.size() == local.size());
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(local[i]).epsilon(1e-15));
  }

  TEST_CASE("generate rule answers the alphabetically first mentioned choice") {
    MockServer server(MockFixtures{});
    server.start();
    Gateway g({endpoint("m", server.base_url(), kAll)}, nullptr);
    const std::string prompt =
        "INSTRUCTION: pick\n"
        "Context [a]: a zebra and a cat\n"
        "Question: which?\n"
        "Choices: (a) zebra (b) cat (c) dog\n"
        "Plausible answer [a]: zebra\n"
        "Answer:";
    CHECK(g.generate("m", prompt).text == "cat");
    CHECK(g.generate("m", "Choices: (a) x (b) y\nAnswer:").text == "unknown");
    MockFixtures exact;
    exact.generations.push_back({sha256_hex(prompt), "scripted", ""});
    MockServer s2(exact);
    s2.start();
    Gateway g2({endpoint("m", s2.base_url(), kAll)}, nullptr);
    CHECK(g2.generate("m", prompt).text == "scripted");
  }

  TEST_CASE("in-flight requests never exceed max_concurrency") {
    MockFixtures fx;
    fx.latency_ms = 15;
    MockServer server(fx);
    server.start();
    auto ep = endpoint("m", server.base_url(), kAll);
    ep.max_concurrency = 3;
    Gateway g({ep}, nullptr);
    std::vector<std::thread> workers;
    for (int t = 0; t < 10; ++t) {
      workers.emplace_back([&, t] {
        for (int i = 0; i < 4; ++i) g.generate("m", "prompt " + std::to_string(t) + "/" + std::to_string(i));
      });
    }
    for (auto& w : workers) w.join();
    CHECK(server.request_count() == 40);
    CHECK(server.max_in_flight() <= 3);
    CHECK(server.max_in_flight() >= 2);
  }

  TEST_CASE("fixture files round-trip and malformed ones are rejected") {
    MockFixtures fx;
    fx.default_answer = "no idea";
    fx.captions.push_back({"d", "c", "s"});
    fx.answers.push_back({"d", "q", "a", ""});
    fx.generations.push_back({"h", "t", ""});
    fx.faults.push_back({"vqa", "s", 1, false, 500, "d"});
    const auto back = MockFixtures::from_json_text(fx.to_json_text());
    CHECK(back.to_json_text() == fx.to_json_text());
    CHECK(back.default_answer == "no idea");
    CHECK(back.faults.at(0).status == 500);
    CHECK_THROWS_AS(MockFixtures::from_json_text("[1,2]"), FormatError);
    CHECK_THROWS_AS(MockFixtures::from_json_text(R"({"captions":[{"image":1}]})"), FormatError);
    CHECK_THROWS_AS(MockFixtures::load("/nonexistent.json"), IoError);
  }

  TEST_CASE("binding a busy port is an error") {
    MockServer a(MockFixtures{});
    const int port = a.start();
    MockServer b(MockFixtures{});
    CHECK_THROWS_AS(b.start(port), IoError);
  }
}
