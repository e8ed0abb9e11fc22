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

#include "cola/templates.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cola/error.hpp"

using nlohmann::json;

namespace cola {

namespace {

constexpr std::string_view kInstruction = "INSTRUCTION: ";
constexpr std::string_view kQuestion = "Question: ";
constexpr std::string_view kChoices = "Choices: ";
constexpr std::string_view kContext = "Context [";
constexpr std::string_view kPlausible = "Plausible answer [";
constexpr std::string_view kAnswer = "Answer:";
constexpr std::string_view kFrame = "Frame ";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Single line, non-empty, no surrounding whitespace.
void check_field(const std::string& what, const std::string& s) {
  if (s.empty()) throw InvalidArgument(what + " must be non-empty");
  if (s.find_first_of("\r\n") != std::string::npos) {
    throw InvalidArgument(what + " must be a single line");
  }
  if (is_space(s.front()) || is_space(s.back())) {
    throw InvalidArgument(what + " must not start or end with whitespace");
  }
}

void check_endpoint_text(const std::string& what, const EndpointText& m) {
  if (m.empty()) throw InvalidArgument(what + ": at least one endpoint required");
  for (const auto& [name, text] : m) {
    check_field("endpoint name", name);
    if (name.find(']') != std::string::npos) {
      throw InvalidArgument("endpoint name '" + name + "' must not contain ']'");
    }
    check_field(what + " [" + name + "]", text);
  }
}

void check_choices(const std::string& what, const std::vector<std::string>& choices) {
  if (choices.empty()) throw InvalidArgument(what + " must be non-empty");
  std::set<std::string> seen;
  for (const auto& c : choices) {
    check_field(what + " entry", c);
    if (!seen.insert(c).second) throw InvalidArgument(what + " contain duplicate '" + c + "'");
  }
  // A marker inside a choice would make the Choices line ambiguous.
  if (parse_choices(render_choices(choices)) != choices) {
    throw InvalidArgument(what + " embed a choice marker");
  }
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

// "<prefix><name>]: <text>" -> (name, text)
std::optional<std::pair<std::string, std::string>> parse_tagged(std::string_view line,
                                                               std::string_view prefix) {
  if (!starts_with(line, prefix)) return std::nullopt;
  const auto rest = line.substr(prefix.size());
  const auto close = rest.find("]: ");
  if (close == std::string_view::npos) throw FormatError("malformed line: " + std::string(line));
  return std::make_pair(std::string(rest.substr(0, close)), std::string(rest.substr(close + 3)));
}

class LineCursor {
 public:
  explicit LineCursor(std::string_view text) : lines_(split_lines(text)) {}

  bool done() const { return pos_ >= lines_.size(); }
  std::string_view peek() const { return done() ? std::string_view{} : lines_[pos_]; }
  std::string_view take() {
    if (done()) throw FormatError("prompt ended early");
    return lines_[pos_++];
  }
  std::string take_field(std::string_view prefix) {
    const auto line = take();
    if (!starts_with(line, prefix)) {
      throw FormatError("expected '" + std::string(prefix) + "...', got '" + std::string(line) + "'");
    }
    return std::string(line.substr(prefix.size()));
  }
  EndpointText take_tagged(std::string_view prefix) {
    EndpointText out;
    while (!done()) {
      auto parsed = parse_tagged(peek(), prefix);
      if (!parsed) break;
      ++pos_;
      if (!out.emplace(std::move(parsed->first), std::move(parsed->second)).second) {
        throw FormatError("duplicate endpoint in '" + std::string(prefix) + "' lines");
      }
    }
    return out;
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

void render_tagged(std::ostringstream& out, std::string_view prefix, const EndpointText& m) {
  for (const auto& [name, text] : m) out << prefix << name << "]: " << text << '\n';
}

std::vector<std::string> endpoint_union(std::initializer_list<const EndpointText*> maps) {
  std::set<std::string> names;
  for (const auto* m : maps) {
    for (const auto& [name, _] : *m) names.insert(name);
  }
  return {names.begin(), names.end()};
}

}  // namespace

std::string default_vqa_instruction() {
  return "Several vision-language models describe the same image and suggest answers. "
         "Use their context and plausible answers to choose the correct option.";
}

std::string default_har_instruction() {
  return "Several vision-language models describe keyframes of one video, listed in no "
         "particular time order. Use them to decide which action the video shows.";
}

std::string choice_label(std::size_t index) {
  std::string out;
  std::size_t n = index + 1;
  while (n > 0) {
    --n;
    out.insert(out.begin(), static_cast<char>('a' + n % 26));
    n /= 26;
  }
  return out;
}

std::string render_choices(std::span<const std::string> choices) {
  std::string out;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (i) out += ' ';
    out += "(" + choice_label(i) + ") " + choices[i];
  }
  return out;
}

std::vector<std::string> parse_choices(std::string_view body) {
  std::vector<std::string> out;
  const std::string first = "(" + choice_label(0) + ") ";
  if (!starts_with(body, first)) throw FormatError("choices must start with " + first);
  std::size_t pos = first.size();
  while (true) {
    const std::string next = " (" + choice_label(out.size() + 1) + ") ";
    const auto hit = body.find(next, pos);
    if (hit == std::string_view::npos) {
      out.emplace_back(body.substr(pos));
      break;
    }
    out.emplace_back(body.substr(pos, hit - pos));
    pos = hit + next.size();
  }
  return out;
}

void VqaContext::validate() const {
  check_field("instruction", instruction);
  check_endpoint_text("caption", captions);
  check_field("question", question);
  check_choices("choices", choices);
  check_endpoint_text("plausible answer", answers);
}

void HarContext::validate() const {
  check_field("instruction", instruction);
  if (blocks.empty()) throw InvalidArgument("HAR prompt needs at least one keyframe block");
  if (blocks.size() > static_cast<std::size_t>(max_keyframes)) {
    throw InvalidArgument("HAR prompt has " + std::to_string(blocks.size()) +
                          " keyframe blocks, limit is " + std::to_string(max_keyframes));
  }
  for (const auto& b : blocks) {
    check_endpoint_text("caption", b.captions);
    check_endpoint_text("action answer", b.answers);
  }
  check_choices("class names", class_names);
}

PromptRecord build_vqa_prompt(const VqaContext& ctx, const std::string& item_id) {
  ctx.validate();
  std::ostringstream out;
  out << kInstruction << ctx.instruction << '\n';
  render_tagged(out, kContext, ctx.captions);
  out << kQuestion << ctx.question << '\n';
  out << kChoices << render_choices(ctx.choices) << '\n';
  render_tagged(out, kPlausible, ctx.answers);
  out << kAnswer;

  PromptRecord rec;
  rec.prompt_text = out.str();
  rec.provenance.item_id = item_id;
  rec.provenance.endpoints = endpoint_union({&ctx.captions, &ctx.answers});
  return rec;
}

PromptRecord build_har_prompt(const HarContext& ctx) {
  ctx.validate();
  std::ostringstream out;
  out << kInstruction << ctx.instruction << '\n';
  std::set<std::string> names;
  PromptRecord rec;
  for (std::size_t k = 0; k < ctx.blocks.size(); ++k) {
    const auto& b = ctx.blocks[k];
    out << kFrame << k << ":\n";
    render_tagged(out, kContext, b.captions);
    render_tagged(out, kPlausible, b.answers);
    for (const auto& n : endpoint_union({&b.captions, &b.answers})) names.insert(n);
    rec.provenance.keyframes.push_back(b.cluster_id);
  }
  out << kQuestion << kVideoQuestion << '\n';
  out << kChoices << render_choices(ctx.class_names) << '\n';
  out << kAnswer;

  rec.prompt_text = out.str();
  rec.provenance.item_id = ctx.video_id;
  rec.provenance.endpoints.assign(names.begin(), names.end());
  return rec;
}

VqaContext parse_vqa_prompt(std::string_view text) {
  LineCursor cur(text);
  VqaContext ctx;
  ctx.instruction = cur.take_field(kInstruction);
  ctx.captions = cur.take_tagged(kContext);
  if (ctx.captions.empty()) throw FormatError("missing Context lines");
  ctx.question = cur.take_field(kQuestion);
  ctx.choices = parse_choices(cur.take_field(kChoices));
  ctx.answers = cur.take_tagged(kPlausible);
  if (ctx.answers.empty()) throw FormatError("missing Plausible answer lines");
  if (cur.take() != kAnswer) throw FormatError("expected terminal 'Answer:' line");
  if (!cur.done()) throw FormatError("text after 'Answer:'");
  return ctx;
}

HarContext parse_har_prompt(std::string_view text) {
  LineCursor cur(text);
  HarContext ctx;
  ctx.instruction = cur.take_field(kInstruction);
  while (starts_with(cur.peek(), kFrame)) {
    const auto header = cur.take();
    const std::string expected = std::string(kFrame) + std::to_string(ctx.blocks.size()) + ":";
    if (header != expected) {
      throw FormatError("expected '" + expected + "', got '" + std::string(header) + "'");
    }
    KeyframeBlock b;
    b.cluster_id = static_cast<int>(ctx.blocks.size());
    b.captions = cur.take_tagged(kContext);
    b.answers = cur.take_tagged(kPlausible);
    if (b.captions.empty() || b.answers.empty()) throw FormatError("incomplete " + expected + " block");
    ctx.blocks.push_back(std::move(b));
  }
  if (ctx.blocks.empty()) throw FormatError("HAR prompt has no Frame blocks");
  const auto q = cur.take_field(kQuestion);
  if (q != kVideoQuestion) throw FormatError("unexpected HAR question '" + q + "'");
  ctx.class_names = parse_choices(cur.take_field(kChoices));
  if (cur.take() != kAnswer) throw FormatError("expected terminal 'Answer:' line");
  if (!cur.done()) throw FormatError("text after 'Answer:'");
  ctx.max_keyframes = std::max<int>(ctx.max_keyframes, static_cast<int>(ctx.blocks.size()));
  return ctx;
}

std::string fold_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

namespace {

std::vector<std::string> words_of(const std::string& folded) {
  std::vector<std::string> words;
  std::istringstream in(folded);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

bool contains_words(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  return (" " + haystack + " ").find(" " + needle + " ") != std::string::npos;
}

// Strips a leading "(x)" marker; returns the marker letters when present.
std::optional<std::string> strip_marker(std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos || s[b] != '(') return std::nullopt;
  const auto close = s.find(')', b);
  if (close == std::string::npos || close == b + 1 || close - b > 3) return std::nullopt;
  std::string marker;
  for (std::size_t i = b + 1; i < close; ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (!std::isalpha(c)) return std::nullopt;
    marker.push_back(static_cast<char>(std::tolower(c)));
  }
  s.erase(0, close + 1);
  return marker;
}

}  // namespace

std::optional<std::size_t> normalize_answer(std::string_view raw,
                                            std::span<const std::string> labels) {
  std::string text(raw);
  const auto marker = strip_marker(text);
  const std::string answer = fold_text(text);
  std::vector<std::string> folded;
  folded.reserve(labels.size());
  for (const auto& l : labels) folded.push_back(fold_text(l));

  if (answer.empty()) {
    if (marker) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (choice_label(i) == *marker) return i;
      }
    }
    return std::nullopt;
  }

  for (std::size_t i = 0; i < folded.size(); ++i) {
    if (folded[i] == answer) return i;
  }

  std::optional<std::size_t> unique;
  int hits = 0;
  for (std::size_t i = 0; i < folded.size(); ++i) {
    if (contains_words(answer, folded[i]) || contains_words(folded[i], answer)) {
      ++hits;
      unique = i;
    }
  }
  if (hits == 1) return unique;

  const auto answer_words = words_of(answer);
  const std::set<std::string> answer_set(answer_words.begin(), answer_words.end());
  std::optional<std::size_t> best;
  std::size_t best_overlap = 0;
  for (std::size_t i = 0; i < folded.size(); ++i) {
    const auto lw = words_of(folded[i]);
    const std::set<std::string> label_set(lw.begin(), lw.end());
    std::size_t overlap = 0;
    for (const auto& w : label_set) overlap += answer_set.count(w);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = i;
    }
  }
  return best;
}

namespace {

json provenance_json(const Provenance& p) {
  json j{{"item_id", p.item_id}, {"endpoints", p.endpoints}, {"template_version", p.template_version}};
  if (!p.keyframes.empty()) j["keyframes"] = p.keyframes;
  return j;
}

Provenance provenance_from(const json& j) {
  Provenance p;
  p.item_id = j.at("item_id").get<std::string>();
  p.endpoints = j.at("endpoints").get<std::vector<std::string>>();
  p.template_version = j.at("template_version").get<std::string>();
  if (j.contains("keyframes")) p.keyframes = j.at("keyframes").get<std::vector<int>>();
  return p;
}

}  // namespace

void export_training_records(std::span<const PromptRecord> records, const std::string& path) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].target) {
      throw InvalidArgument("training record " + std::to_string(i) + " (" +
                            records[i].provenance.item_id + ") has no target");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : records) {
    json j{{"prompt", r.prompt_text}, {"target", *r.target}, {"provenance", provenance_json(r.provenance)}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

std::vector<PromptRecord> read_training_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::vector<PromptRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      PromptRecord r;
      r.prompt_text = j.at("prompt").get<std::string>();
      r.target = j.at("target").get<std::string>();
      r.provenance = provenance_from(j.at("provenance"));
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cola
