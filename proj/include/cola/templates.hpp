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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cola {

// Canonical prompt grammar, one field per line:
//
//   INSTRUCTION: <text>
//   Context [<endpoint>]: <caption>            one per endpoint
//   Question: <text>
//   Choices: (a) <c1> (b) <c2> ...
//   Plausible answer [<endpoint>]: <answer>    one per endpoint
//   Answer:
//
// The HAR variant replaces the context/answer lines with one block per
// keyframe ("Frame <k>:" followed by that frame's Context and Plausible
// answer lines) placed before the Question line, and has no trailing answer
// lines. Endpoints appear in lexicographic order of their names.
inline constexpr std::string_view kTemplateVersion = "cola-v1";
inline constexpr std::string_view kFrameQuestion = "What action is happening in the frame?";
inline constexpr std::string_view kVideoQuestion = "What action is happening in the video?";

std::string default_vqa_instruction();
std::string default_har_instruction();

// Per-endpoint text keyed by endpoint name; std::map gives the render order.
using EndpointText = std::map<std::string, std::string>;

struct VqaContext {
  std::string instruction = default_vqa_instruction();
  EndpointText captions;
  std::string question;
  std::vector<std::string> choices;
  EndpointText answers;

  void validate() const;
  friend bool operator==(const VqaContext&, const VqaContext&) = default;
};

struct KeyframeBlock {
  int cluster_id = 0;
  EndpointText captions;
  EndpointText answers;  // replies to kFrameQuestion

  friend bool operator==(const KeyframeBlock&, const KeyframeBlock&) = default;
};

struct HarContext {
  std::string instruction = default_har_instruction();
  std::string video_id;
  std::vector<KeyframeBlock> blocks;  // in keyframe-selector order
  std::vector<std::string> class_names;
  int max_keyframes = 10;

  void validate() const;
};

struct Provenance {
  std::string item_id;
  std::vector<std::string> endpoints;
  std::string template_version{kTemplateVersion};
  std::vector<int> keyframes;  // cluster ids, HAR only

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct PromptRecord {
  std::string prompt_text;
  Provenance provenance;
  std::optional<std::string> target;

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

// "a".."z", then "aa", "ab", ... (bijective base 26).
std::string choice_label(std::size_t index);
std::string render_choices(std::span<const std::string> choices);
std::vector<std::string> parse_choices(std::string_view line_body);

PromptRecord build_vqa_prompt(const VqaContext& ctx, const std::string& item_id = {});
PromptRecord build_har_prompt(const HarContext& ctx);

// Inverse of the renderers; throw FormatError on text outside the grammar.
// Parsed HAR blocks carry their position as cluster_id.
VqaContext parse_vqa_prompt(std::string_view text);
HarContext parse_har_prompt(std::string_view text);

// Maps free-form model output onto a label index. Both sides are folded
// (lower case, punctuation to spaces, whitespace collapsed) and a leading
// "(x)" marker is dropped from the answer. Cascade: exact match, then a
// unique whole-word substring match in either direction, then the largest
// word overlap (lower index wins ties). nullopt only when no label shares a
// word with the answer. A bare marker such as "(b)" selects that choice.
std::optional<std::size_t> normalize_answer(std::string_view raw,
                                            std::span<const std::string> labels);
std::string fold_text(std::string_view text);

// JSONL: {"prompt": ..., "target": ..., "provenance": {...}} per line.
void export_training_records(std::span<const PromptRecord> records, const std::string& path);
std::vector<PromptRecord> read_training_records(const std::string& path);

}  // namespace cola
