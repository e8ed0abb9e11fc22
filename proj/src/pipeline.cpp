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

#include "cola/pipeline.hpp"

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "cola/ensemble.hpp"
#include "cola/error.hpp"
#include "cola/image_io.hpp"
#include "cola/log.hpp"
#include "cola/templates.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace cola {

int RunResult::exit_code() const {
  if (report.errors.empty()) return kExitOk;
  return report.evaluated == 0 ? kExitTotalFailure : kExitItemErrors;
}

int ExportResult::exit_code() const {
  if (errors.empty()) return kExitOk;
  return records == 0 ? kExitTotalFailure : kExitItemErrors;
}

namespace {

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Model text collapsed to one line so it fits a template field.
std::string one_line(const std::string& text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

// Runs fn(i) for i in [0, n) on at most `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

class Session {
 public:
  Session(const RunConfig& config, const RunHooks& hooks)
      : config_(config),
        cache_(config.cache_dir.empty() ? nullptr : std::make_shared<ResponseCache>(config.cache_dir)),
        gateway_(config.endpoints, cache_),
        out_(config.output_dir) {
    make_dirs(out_);
    run_log_.open(out_ / "run_log.jsonl", std::ios::binary | std::ios::trunc);
    if (!run_log_) throw IoError("cannot write " + (out_ / "run_log.jsonl").string());
    gateway_.set_attempt_observer([this, cb = hooks.on_attempt](const AttemptEvent& e) {
      {
        std::lock_guard lock(log_mu_);
        run_log_ << json{{"endpoint", e.endpoint},
                         {"kind", to_string(e.kind)},
                         {"attempt", e.attempt},
                         {"status", e.status},
                         {"ok", e.ok},
                         {"will_retry", e.will_retry},
                         {"backoff_ms", e.backoff_ms},
                         {"error", e.error}}
                        .dump()
                 << "\n";
        run_log_.flush();
      }
      if (!e.ok) log::info("[" + e.endpoint + "] attempt " + std::to_string(e.attempt) + ": " + e.error);
      if (cb) cb(e);
    });
    if (hooks.sleeper) gateway_.set_sleeper(hooks.sleeper);
  }

  const RunConfig& config() const { return config_; }
  Gateway& gateway() { return gateway_; }
  const fs::path& out() const { return out_; }

  void fill_counters(RunResult& r) const {
    r.network_calls = gateway_.network_calls();
    if (cache_) {
      r.cache_hits = cache_->hits();
      r.cache_misses = cache_->misses();
    }
  }

 private:
  const RunConfig& config_;
  std::shared_ptr<ResponseCache> cache_;
  Gateway gateway_;
  fs::path out_;
  std::mutex log_mu_;
  std::ofstream run_log_;
};

DatasetManifest manifest_for(const RunConfig& config) {
  config.validate();
  return load_manifest(config.dataset_manifest, config.task);
}

// Keyframes, per-frame VLM outputs and the HAR prompt for one video.
struct HarPrompt {
  PromptRecord record;
  json keyframes = json::array();
};

HarPrompt prepare_har(Session& s, const HarItem& item, const std::vector<std::string>& class_names) {
  const auto& cfg = s.config();
  auto source = infer_frame_source(item.source, cfg.decoder_command);
  source.fps_hint = cfg.fps;
  auto stream = open_frame_source(source);
  const auto kfs = select_keyframes(*stream, cfg.selection, item.video_id);
  if (kfs.empty()) throw Error("no frame passed the brightness/entropy gates");
  write_keyframes((s.out() / "keyframes").string(), item.video_id, kfs);

  HarContext ctx;
  if (cfg.instruction) ctx.instruction = *cfg.instruction;
  ctx.video_id = item.video_id;
  ctx.class_names = class_names;
  ctx.max_keyframes = cfg.selection.max_keyframes;
  HarPrompt out;
  const std::string question(kFrameQuestion);
  for (const auto& kf : kfs) {
    KeyframeBlock block;
    block.cluster_id = kf.cluster_id;
    for (const auto& vlm : cfg.vlm_endpoints()) {
      block.captions[vlm] = one_line(s.gateway().caption(vlm, kf.frame).text);
      block.answers[vlm] = one_line(s.gateway().vqa_answer(vlm, kf.frame, question).text);
    }
    out.keyframes.push_back({{"cluster_id", kf.cluster_id},
                             {"frame_index", kf.frame.index},
                             {"timestamp_ms", kf.frame.timestamp_ms},
                             {"captions", block.captions},
                             {"answers", block.answers}});
    ctx.blocks.push_back(std::move(block));
  }
  out.record = build_har_prompt(ctx);
  out.record.target = item.action_label;
  write_text(s.out() / "prompts" / (item.video_id + ".txt"), out.record.prompt_text);
  return out;
}

struct VqaPrompt {
  PromptRecord record;
  json captions;
  json answers;
};

VqaPrompt prepare_vqa_cola(Session& s, const VqaItem& item, const Frame& image) {
  const auto& cfg = s.config();
  VqaContext ctx;
  if (cfg.instruction) ctx.instruction = *cfg.instruction;
  ctx.question = item.question;
  ctx.choices = item.choices;
  for (const auto& vlm : cfg.vlm_endpoints()) {
    ctx.captions[vlm] = one_line(s.gateway().caption(vlm, image).text);
    ctx.answers[vlm] = one_line(s.gateway().vqa_answer(vlm, image, item.question, item.choices).text);
  }
  VqaPrompt out;
  out.record = build_vqa_prompt(ctx, item.item_id);
  out.record.target = item.choices[item.correct_choice_idx];
  out.captions = ctx.captions;
  out.answers = ctx.answers;
  write_text(s.out() / "prompts" / (item.item_id + ".txt"), out.record.prompt_text);
  return out;
}

struct ItemOutcome {
  std::optional<std::string> error;
  std::size_t gold = 0;
  std::optional<std::size_t> predicted;
  json prediction;  // predictions.jsonl row
};

RunResult finish(Session& s, const std::string& task, const std::vector<std::string>& classes,
                 const std::vector<std::string>& ids, std::vector<ItemOutcome>& outcomes,
                 bool with_accuracy) {
  ConfusionMatrix cm(classes);
  std::vector<ItemError> errors;
  std::vector<std::optional<std::size_t>> predicted;
  std::vector<std::size_t> gold;
  std::string lines;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (o.error) {
      errors.push_back({ids[i], *o.error});
      lines += json{{"item_id", ids[i]}, {"error", *o.error}}.dump() + "\n";
      continue;
    }
    cm.add(o.gold, o.predicted);
    predicted.push_back(o.predicted);
    gold.push_back(o.gold);
    lines += o.prediction.dump() + "\n";
  }
  write_text(s.out() / "predictions.jsonl", lines);
  std::optional<double> accuracy;
  if (with_accuracy) accuracy = mcq_accuracy(predicted, gold);
  RunResult r;
  r.report = make_report(task, std::move(cm), accuracy, gold.size(), std::move(errors));
  write_report(r.report, s.out().string());
  s.fill_counters(r);
  for (const auto& e : r.report.errors) log::warning("item " + e.item_id + " failed: " + e.message);
  return r;
}

}  // namespace

RunResult run_har(const RunConfig& config, const RunHooks& hooks) {
  if (config.task != Task::kHar) throw ConfigError("run_har needs a har config");
  const auto manifest = manifest_for(config);
  Session s(config, hooks);
  for (const char* sub : {"keyframes", "prompts", "responses"}) make_dirs(s.out() / sub);

  const auto& items = manifest.har_items;
  const auto llm = config.llm_endpoint();
  std::vector<ItemOutcome> outcomes(items.size());
  parallel_for(items.size(), config.parallel_videos, [&](std::size_t i) {
    const auto& item = items[i];
    auto& o = outcomes[i];
    try {
      auto prep = prepare_har(s, item, manifest.class_names);
      const auto raw = s.gateway().generate(llm, prep.record.prompt_text).text;
      o.predicted = normalize_answer(raw, manifest.class_names);
      o.gold = static_cast<std::size_t>(
          std::find(manifest.class_names.begin(), manifest.class_names.end(), item.action_label) -
          manifest.class_names.begin());
      const json label = o.predicted ? json(manifest.class_names[*o.predicted]) : json(nullptr);
      const json response{{"item_id", item.video_id},
                          {"keyframes", prep.keyframes},
                          {"generation", {{"endpoint", llm}, {"text", raw}}},
                          {"predicted", label},
                          {"gold", item.action_label}};
      write_text(s.out() / "responses" / (item.video_id + ".json"), response.dump(2) + "\n");
      o.prediction = {{"item_id", item.video_id}, {"gold", item.action_label}, {"predicted", label}, {"raw", raw}};
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });

  std::vector<std::string> ids;
  for (const auto& it : items) ids.push_back(it.video_id);
  return finish(s, "har", manifest.class_names, ids, outcomes, false);
}

RunResult run_vqa(const RunConfig& config, VqaMode mode, const RunHooks& hooks) {
  if (config.task != Task::kVqa) throw ConfigError("run_vqa needs a vqa-mcq config");
  RunConfig cfg = config;
  cfg.mode = mode;
  const auto manifest = manifest_for(cfg);
  Session s(cfg, hooks);
  for (const char* sub : {"prompts", "responses"}) make_dirs(s.out() / sub);

  const auto& items = manifest.vqa_items;
  std::size_t max_choices = 0;
  for (const auto& it : items) max_choices = std::max(max_choices, it.choices.size());
  std::vector<std::string> classes;
  for (std::size_t c = 0; c < max_choices; ++c) classes.push_back(choice_label(c));

  const auto vlms = cfg.vlm_endpoints();
  std::vector<ItemOutcome> outcomes(items.size());
  parallel_for(items.size(), cfg.parallel_videos, [&](std::size_t i) {
    const auto& item = items[i];
    auto& o = outcomes[i];
    try {
      const Frame image = read_image_file(item.image_path);
      json response{{"item_id", item.item_id}, {"mode", to_string(mode)}};
      std::string raw;
      if (mode == VqaMode::kEnsemble) {
        GatewayEmbedder embedder(s.gateway(), cfg.embed_endpoint());
        const auto pred = ensemble_predict(s.gateway(), image, item.question, item.choices, vlms, embedder);
        o.predicted = pred.scores.chosen_index;
        json answers = json::object();
        json per_endpoint = json::object();
        for (std::size_t k = 0; k < pred.answers.size(); ++k) {
          answers[pred.answers[k].endpoint] = pred.answers[k].text;
          per_endpoint[pred.answers[k].endpoint] = pred.scores.per_endpoint[k];
        }
        response["answers"] = answers;
        response["scores"] = pred.scores.mean;
        response["per_endpoint_scores"] = per_endpoint;
      } else {
        const auto prep = prepare_vqa_cola(s, item, image);
        const auto llm = cfg.llm_endpoint();
        raw = s.gateway().generate(llm, prep.record.prompt_text).text;
        o.predicted = normalize_answer(raw, item.choices);
        response["captions"] = prep.captions;
        response["answers"] = prep.answers;
        response["generation"] = {{"endpoint", llm}, {"text", raw}};
      }
      o.gold = item.correct_choice_idx;
      const json idx = o.predicted ? json(*o.predicted) : json(nullptr);
      response["predicted_index"] = idx;
      response["gold_index"] = item.correct_choice_idx;
      write_text(s.out() / "responses" / (item.item_id + ".json"), response.dump(2) + "\n");
      o.prediction = {{"item_id", item.item_id},
                      {"gold_index", item.correct_choice_idx},
                      {"predicted_index", idx},
                      {"predicted", o.predicted ? json(item.choices[*o.predicted]) : json(nullptr)}};
      if (mode == VqaMode::kCola) o.prediction["raw"] = raw;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });

  std::vector<std::string> ids;
  for (const auto& it : items) ids.push_back(it.item_id);
  return finish(s, "vqa-mcq", classes, ids, outcomes, true);
}

RunResult run(const RunConfig& config, const RunHooks& hooks) {
  return config.task == Task::kHar ? run_har(config, hooks) : run_vqa(config, config.mode, hooks);
}

ExportResult export_training_data(const RunConfig& config, const RunHooks& hooks) {
  RunConfig cfg = config;
  cfg.mode = VqaMode::kCola;
  const auto manifest = manifest_for(cfg);
  Session s(cfg, hooks);
  for (const char* sub : {"keyframes", "prompts"}) make_dirs(s.out() / sub);

  const std::size_t n = manifest.size();
  std::vector<std::optional<PromptRecord>> records(n);
  std::vector<std::optional<std::string>> failures(n);
  parallel_for(n, cfg.parallel_videos, [&](std::size_t i) {
    try {
      if (cfg.task == Task::kHar) {
        records[i] = prepare_har(s, manifest.har_items[i], manifest.class_names).record;
      } else {
        const auto& item = manifest.vqa_items[i];
        records[i] = prepare_vqa_cola(s, item, read_image_file(item.image_path)).record;
      }
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  ExportResult r;
  std::vector<PromptRecord> ok;
  for (std::size_t i = 0; i < n; ++i) {
    if (records[i]) {
      ok.push_back(std::move(*records[i]));
    } else {
      const auto id = cfg.task == Task::kHar ? manifest.har_items[i].video_id : manifest.vqa_items[i].item_id;
      r.errors.push_back({id, failures[i].value_or("unknown failure")});
      log::warning("item " + id + " failed: " + r.errors.back().message);
    }
  }
  r.path = (s.out() / "train.jsonl").string();
  export_training_records(ok, r.path);
  r.records = ok.size();
  r.network_calls = s.gateway().network_calls();
  return r;
}

EvalReport load_run_report(const std::string& run_dir) {
  const auto path = fs::path(run_dir) / "report.json";
  if (!fs::exists(path)) throw IoError("no report.json in " + run_dir);
  return read_report_json(path.string());
}

}  // namespace cola
