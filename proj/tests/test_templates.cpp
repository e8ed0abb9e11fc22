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

#include <json.hpp>

#include <random>

#include "cola/error.hpp"
#include "cola/templates.hpp"
#include "support.hpp"

using namespace cola;

namespace {

VqaContext golden_vqa() {
  VqaContext ctx;
  ctx.instruction = "Pick the best option.";
  ctx.captions["ofa"] = "a brown dog lying on a couch";
  ctx.captions["blip"] = "a dog on a red sofa";
  ctx.question = "What colour is the sofa?";
  ctx.choices = {"red", "blue", "green", "white"};
  ctx.answers["ofa"] = "It is red.";
  ctx.answers["blip"] = "red";
  return ctx;
}

HarContext golden_har() {
  HarContext ctx;
  ctx.instruction = "Name the action.";
  ctx.video_id = "clip7";
  ctx.blocks.push_back({3, {{"blip", "a man near a car"}, {"ofa", "a street at night"}},
                        {{"blip", "walking"}, {"ofa", "he is walking"}}});
  ctx.blocks.push_back({0, {{"blip", "a man opening a door"}, {"ofa", "a parked car"}},
                        {{"blip", "stealing"}, {"ofa", "walking"}}});
  ctx.class_names = {"running", "sitting", "stealing", "walking"};
  return ctx;
}

std::string golden(const std::string& name) {
  return test::read_file(test::source_dir() + "/tests/golden/" + name);
}

// Printable field text with punctuation, brackets and parentheses but never
// leading/trailing whitespace.
std::string random_text(std::mt19937_64& rng, std::size_t max_len = 24) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,;:!?'\"-()[]/";
  const std::size_t len = 1 + rng() % max_len;
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
  while (!s.empty() && s.back() == ' ') s.pop_back();
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  return s.empty() ? "x" : s;
}

std::string random_name(std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-_.";
  std::string s;
  for (std::size_t i = 0, n = 1 + rng() % 8; i < n; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
  return s;
}

EndpointText random_endpoint_text(std::mt19937_64& rng, const std::vector<std::string>& names) {
  EndpointText m;
  for (const auto& n : names) m[n] = random_text(rng, 60);
  return m;
}

std::vector<std::string> random_choices(std::mt19937_64& rng) {
  std::vector<std::string> out;
  const std::size_t n = 1 + rng() % 30;
  while (out.size() < n) {
    auto c = random_text(rng, 16);
    if (std::find(out.begin(), out.end(), c) != out.end()) continue;
    bool embeds_marker = false;
    for (std::size_t j = 0; j <= n; ++j) {
      embeds_marker |= c.find("(" + choice_label(j) + ")") != std::string::npos;
    }
    if (!embeds_marker) out.push_back(c);
  }
  return out;
}

std::vector<std::string> random_names(std::mt19937_64& rng) {
  std::vector<std::string> names;
  const std::size_t n = 1 + rng() % 4;
  while (names.size() < n) {
    auto s = random_name(rng);
    if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
  }
  return names;
}

}  // namespace

TEST_SUITE("template-engine") {
  TEST_CASE("VQA golden prompt") {
    const auto rec = build_vqa_prompt(golden_vqa(), "img42");
    CHECK(rec.prompt_text == golden("vqa_prompt.txt"));
    CHECK(rec.provenance.item_id == "img42");
    CHECK(rec.provenance.endpoints == std::vector<std::string>{"blip", "ofa"});
    CHECK(rec.provenance.template_version == "cola-v1");
    CHECK(build_vqa_prompt(golden_vqa(), "img42") == rec);
  }

  TEST_CASE("HAR golden prompt keeps the given keyframe order") {
    const auto rec = build_har_prompt(golden_har());
    CHECK(rec.prompt_text == golden("har_prompt.txt"));
    CHECK(rec.provenance.keyframes == std::vector<int>{3, 0});
    CHECK(rec.provenance.item_id == "clip7");
  }

  TEST_CASE("structure: two endpoints, four choices") {
    const auto text = build_vqa_prompt(golden_vqa()).prompt_text;
    auto count = [&](const std::string& needle) {
      std::size_t n = 0;
      for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
      return n;
    };
    CHECK(count("\nContext [") == 2);
    CHECK(count("\nChoices: ") == 1);
    CHECK(count("\nPlausible answer [") == 2);
    CHECK(text.find("(d) white") != std::string::npos);
  }

  TEST_CASE("ten keyframes give ten numbered blocks") {
    HarContext ctx = golden_har();
    ctx.blocks.clear();
    for (int k = 0; k < 10; ++k) ctx.blocks.push_back({9 - k, {{"m", "c" + std::to_string(k)}}, {{"m", "a"}}});
    const auto text = build_har_prompt(ctx).prompt_text;
    for (int k = 0; k < 10; ++k) CHECK(text.find("\nFrame " + std::to_string(k) + ":\n") != std::string::npos);
    CHECK(text.find("Frame 10:") == std::string::npos);
    ctx.blocks.push_back({10, {{"m", "c"}}, {{"m", "a"}}});
    CHECK_THROWS_AS(build_har_prompt(ctx), InvalidArgument);
  }

  TEST_CASE("single block with two endpoints has four content lines") {
    HarContext ctx = golden_har();
    ctx.blocks.resize(1);
    const auto parsed = parse_har_prompt(build_har_prompt(ctx).prompt_text);
    REQUIRE(parsed.blocks.size() == 1);
    CHECK(parsed.blocks[0].captions.size() + parsed.blocks[0].answers.size() == 4);
  }

  TEST_CASE("invalid contexts are rejected") {
    auto ctx = golden_vqa();
    ctx.choices = {"red", "red"};
    CHECK_THROWS_AS(build_vqa_prompt(ctx), InvalidArgument);
    ctx = golden_vqa();
    ctx.choices.clear();
    CHECK_THROWS_AS(build_vqa_prompt(ctx), InvalidArgument);
    ctx = golden_vqa();
    ctx.answers.clear();
    CHECK_THROWS_AS(build_vqa_prompt(ctx), InvalidArgument);
    ctx = golden_vqa();
    ctx.question = "two\nlines";
    CHECK_THROWS_AS(build_vqa_prompt(ctx), InvalidArgument);
    ctx = golden_vqa();
    ctx.captions["bad]name"] = "x";
    CHECK_THROWS_AS(build_vqa_prompt(ctx), InvalidArgument);
    ctx = golden_vqa();
    ctx.choices = {"red (b) blue", "green"};
    CHECK_THROWS_AS(build_vqa_prompt(ctx), InvalidArgument);
    ctx.choices = {"red (b)", "green"};
    CHECK_THROWS_AS(build_vqa_prompt(ctx), InvalidArgument);
    auto har = golden_har();
    har.class_names = {"a", "a"};
    CHECK_THROWS_AS(build_har_prompt(har), InvalidArgument);
    har = golden_har();
    har.blocks.clear();
    CHECK_THROWS_AS(build_har_prompt(har), InvalidArgument);
  }

  TEST_CASE("choice labels continue past z") {
    CHECK(choice_label(0) == "a");
    CHECK(choice_label(25) == "z");
    CHECK(choice_label(26) == "aa");
    CHECK(choice_label(27) == "ab");
    CHECK(choice_label(26 + 26 * 26) == "aaa");
  }

  TEST_CASE("parser rejects text outside the grammar") {
    const auto text = golden("vqa_prompt.txt");
    CHECK_THROWS_AS(parse_vqa_prompt(text + "\n"), FormatError);
    CHECK_THROWS_AS(parse_vqa_prompt(text.substr(0, text.size() - 1)), FormatError);
    CHECK_THROWS_AS(parse_vqa_prompt("Question: q\nAnswer:"), FormatError);
    CHECK_THROWS_AS(parse_har_prompt(text), FormatError);
    auto har = golden("har_prompt.txt");
    har.replace(har.find("Frame 1:"), 8, "Frame 2:");
    CHECK_THROWS_AS(parse_har_prompt(har), FormatError);
  }

  TEST_CASE("fuzzed VQA contexts round-trip and render injectively") {
    std::mt19937_64 rng(2024);
    std::vector<std::pair<VqaContext, std::string>> seen;
    for (int trial = 0; trial < 300; ++trial) {
      VqaContext ctx;
      ctx.instruction = random_text(rng, 80);
      const auto names = random_names(rng);
      ctx.captions = random_endpoint_text(rng, names);
      ctx.question = random_text(rng, 60);
      ctx.choices = random_choices(rng);
      ctx.answers = random_endpoint_text(rng, names);
      const auto text = build_vqa_prompt(ctx).prompt_text;
      const auto back = parse_vqa_prompt(text);
      CHECK(back == ctx);
      if (trial < 60) {
        for (const auto& [other, other_text] : seen) {
          CHECK((other == ctx) == (other_text == text));
        }
        seen.emplace_back(ctx, text);
      }
    }
  }

  TEST_CASE("fuzzed HAR contexts round-trip") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      HarContext ctx;
      ctx.instruction = random_text(rng, 80);
      const auto names = random_names(rng);
      const std::size_t blocks = 1 + rng() % 10;
      for (std::size_t k = 0; k < blocks; ++k) {
        ctx.blocks.push_back({static_cast<int>(k), random_endpoint_text(rng, names),
                              random_endpoint_text(rng, names)});
      }
      ctx.class_names = random_choices(rng);
      const auto back = parse_har_prompt(build_har_prompt(ctx).prompt_text);
      CHECK(back.instruction == ctx.instruction);
      CHECK(back.blocks == ctx.blocks);
      CHECK(back.class_names == ctx.class_names);
    }
  }

  TEST_CASE("normalize_answer cascade") {
    const std::vector<std::string> two{"walking", "running"};
    CHECK(normalize_answer("(b) running", two) == 1u);
    CHECK(normalize_answer("Running.", two) == 1u);
    CHECK(normalize_answer("  WALKING!! ", two) == 0u);
    CHECK(normalize_answer("(b)", two) == 1u);
    CHECK(normalize_answer("(z)", two) == std::nullopt);
    CHECK(normalize_answer("the person is running", two) == 1u);
    const std::vector<std::string> three{"walking", "running", "sitting"};
    CHECK(normalize_answer("the person is sprinting", three) == std::nullopt);
    CHECK(normalize_answer("", three) == std::nullopt);
    const std::vector<std::string> overlap{"red car", "blue car"};
    CHECK(normalize_answer("a car", overlap) == 0u);
    CHECK(normalize_answer("the blue car parked", overlap) == 1u);
    CHECK(normalize_answer("car red or blue", overlap) == 0u);
    const std::vector<std::string> phrases{"fire hydrant", "stop sign"};
    CHECK(normalize_answer("I think it is a stop sign", phrases) == 1u);
  }

  TEST_CASE("every label normalizes to itself") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      auto labels = random_choices(rng);
      std::vector<std::string> folded;
      for (const auto& l : labels) folded.push_back(fold_text(l));
      std::sort(folded.begin(), folded.end());
      const bool distinct_after_fold =
          std::adjacent_find(folded.begin(), folded.end()) == folded.end() &&
          std::find(folded.begin(), folded.end(), "") == folded.end();
      if (!distinct_after_fold) continue;
      for (std::size_t i = 0; i < labels.size(); ++i) CHECK(normalize_answer(labels[i], labels) == i);
    }
  }

  TEST_CASE("training export round-trips") {
    test::TempDir dir;
    CHECK_NOTHROW(export_training_records({}, dir / "empty.jsonl"));
    CHECK(std::filesystem::exists(dir / "empty.jsonl"));
    CHECK(test::read_file(dir / "empty.jsonl").empty());

    std::vector<PromptRecord> recs;
    auto a = build_vqa_prompt(golden_vqa(), "q1");
    a.target = "red";
    auto b = build_har_prompt(golden_har());
    b.target = "walking";
    auto c = build_vqa_prompt(golden_vqa(), "q\"2\"");
    c.target = "caf\xc3\xa9";
    recs = {a, b, c};
    export_training_records(recs, dir / "train.jsonl");
    const auto text = test::read_file(dir / "train.jsonl");
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find('\r') == std::string::npos);
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("prompt"));
      CHECK(j.contains("target"));
      CHECK(j.contains("provenance"));
    }
    CHECK(read_training_records(dir / "train.jsonl") == recs);

    recs[1].target.reset();
    CHECK_THROWS_AS(export_training_records(recs, dir / "bad.jsonl"), InvalidArgument);
    CHECK_THROWS_AS(export_training_records({}, dir / "no/such/dir/x.jsonl"), IoError);
  }
}
