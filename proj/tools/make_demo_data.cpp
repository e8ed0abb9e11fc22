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

// Regenerates data/demo: three framestream videos, five VQA images, their
// manifests and a gold-echo fixture file for `cola serve-mock`.
//
//   make_demo_data <out_dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "cola/digest.hpp"
#include "cola/frame.hpp"
#include "cola/image_io.hpp"
#include "cola/mock_server.hpp"
#include "cola/templates.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kClasses = {
    "carcrash", "falling",  "hitting", "igniting", "kicking",  "luggage",     "murdering",
    "neutral",  "panicking", "running", "sitting",  "stealing", "vandalizing", "walking"};

constexpr int kWidth = 64;
constexpr int kHeight = 48;
constexpr int kFramesPerScene = 6;

struct Rgb {
  int r, g, b;
};

std::uint8_t clamp8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

// Noise texture around a base colour; `drift` nudges every pixel slightly so
// frames inside one scene differ without crossing the scene-change threshold.
cola::Frame scene_frame(const Rgb& base, std::uint64_t texture_seed, int drift, std::int64_t index,
                        int width = kWidth, int height = kHeight) {
  std::mt19937_64 rng(texture_seed);
  std::uniform_int_distribution<int> noise(-24, 24);
  cola::Frame f;
  f.index = index;
  f.width = width;
  f.height = height;
  f.pixels.resize(f.pixel_count() * 3);
  for (std::size_t p = 0; p < f.pixel_count(); ++p) {
    const int n = noise(rng);
    f.pixels[3 * p + 0] = clamp8(base.r + n + drift);
    f.pixels[3 * p + 1] = clamp8(base.g + n / 2 + drift);
    f.pixels[3 * p + 2] = clamp8(base.b - n / 2 + drift);
  }
  return f;
}

struct Video {
  std::string id;
  std::string label;
  std::vector<Rgb> scenes;
};

struct VqaSpec {
  std::string id;
  std::string question;
  std::vector<std::string> choices;
  std::size_t gold;
  Rgb base;
};

cola::Frame vqa_image(const VqaSpec& spec, std::uint64_t seed) {
  auto f = scene_frame(spec.base, seed, 0, 0, 64, 64);
  // A centred block of contrasting colour.
  for (int y = 20; y < 44; ++y) {
    for (int x = 20; x < 44; ++x) {
      auto* px = &f.pixels[3 * (static_cast<std::size_t>(y) * 64 + static_cast<std::size_t>(x))];
      px[0] = clamp8(255 - spec.base.r);
      px[1] = clamp8(255 - spec.base.g);
      px[2] = clamp8(255 - spec.base.b);
    }
  }
  return f;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_demo_data <out_dir>\n";
    return 1;
  }
  const fs::path out = argv[1];
  fs::create_directories(out / "videos");
  fs::create_directories(out / "images");

  cola::MockFixtures fixtures;
  const std::string frame_question(cola::kFrameQuestion);

  const std::vector<Video> videos = {
      {"v001", "walking", {{90, 120, 160}, {180, 90, 60}, {70, 150, 80}}},
      {"v002", "stealing", {{150, 150, 150}, {60, 60, 140}, {200, 170, 90}, {120, 60, 120}}},
      {"v003", "sitting", {{110, 90, 70}, {60, 140, 140}}},
  };
  json har_items = json::array();
  std::uint64_t seed = 1000;
  for (const auto& v : videos) {
    std::vector<cola::Frame> frames;
    for (const auto& scene : v.scenes) {
      ++seed;
      for (int k = 0; k < kFramesPerScene; ++k) {
        frames.push_back(scene_frame(scene, seed, k % 3, static_cast<std::int64_t>(frames.size())));
      }
    }
    const auto file = "videos/" + v.id + ".fs";
    cola::write_framestream_file((out / file).string(), frames, 25000);
    har_items.push_back({{"video_id", v.id}, {"source", file}, {"action_label", v.label}});
    for (const auto& f : frames) {
      const auto digest = cola::image_digest(f);
      fixtures.captions.push_back({digest, "a surveillance view of a street with one person", "vlm-a"});
      fixtures.captions.push_back({digest, "an outdoor camera frame", "vlm-b"});
      fixtures.answers.push_back({digest, frame_question, "the person is " + v.label, "vlm-a"});
      fixtures.answers.push_back({digest, frame_question, v.label, "vlm-b"});
    }
  }
  write_json(out / "har_manifest.json", {{"task", "har"},
                                         {"split", "demo"},
                                         {"class_names", kClasses},
                                         {"items", har_items}});

  const std::vector<VqaSpec> specs = {
      {"q001", "What colour dominates the picture?", {"red", "green", "blue", "yellow"}, 2, {40, 60, 200}},
      {"q002", "What shape is drawn in the centre?", {"circle", "square", "triangle", "star"}, 1, {200, 200, 200}},
      {"q003", "Which season does the scene suggest?", {"winter", "spring", "summer", "autumn"}, 0, {220, 230, 240}},
      {"q004", "How many blocks are visible?", {"one", "two", "three", "four"}, 0, {100, 140, 60}},
      {"q005", "What is the texture of the background?", {"smooth", "striped", "checkered", "noisy"}, 3, {150, 100, 90}},
  };
  json vqa_items = json::array();
  for (const auto& s : specs) {
    const auto img = vqa_image(s, ++seed);
    const auto file = "images/" + s.id + ".png";
    cola::write_png_file((out / file).string(), img);
    vqa_items.push_back({{"item_id", s.id},
                         {"image_path", file},
                         {"question", s.question},
                         {"choices", s.choices},
                         {"correct_choice_idx", s.gold}});
    const auto digest = cola::image_digest(img);
    fixtures.captions.push_back({digest, "a small synthetic test image", "vlm-a"});
    fixtures.captions.push_back({digest, "an abstract computer generated picture", "vlm-b"});
    fixtures.answers.push_back({digest, s.question, s.choices[s.gold], "vlm-a"});
    fixtures.answers.push_back({digest, s.question, s.choices[s.gold], "vlm-b"});
  }
  write_json(out / "vqa_manifest.json", {{"task", "vqa-mcq"}, {"split", "demo"}, {"items", vqa_items}});

  std::ofstream(out / "fixtures.json", std::ios::binary | std::ios::trunc) << fixtures.to_json_text();
  std::cout << "wrote " << har_items.size() << " videos, " << vqa_items.size() << " images, "
            << fixtures.captions.size() << " caption fixtures to " << out.string() << "\n";
  return 0;
}
