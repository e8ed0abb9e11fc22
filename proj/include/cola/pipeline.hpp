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

#include <functional>
#include <string>

#include "cola/config.hpp"
#include "cola/gateway.hpp"
#include "cola/metrics.hpp"

namespace cola {

// CLI exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitItemErrors = 2;
inline constexpr int kExitTotalFailure = 3;

struct RunResult {
  EvalReport report;
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;

  int exit_code() const;
};

// Hooks for tests: observe gateway attempts or replace the backoff sleep.
struct RunHooks {
  std::function<void(const AttemptEvent&)> on_attempt;
  std::function<void(int)> sleeper;
};

// Artifacts under config.output_dir:
//   keyframes/<video>/kf_<c>.png, keyframes.json   (har)
//   prompts/<item>.txt                             (cola path)
//   responses/<item>.json                          raw model outputs
//   predictions.jsonl, report.json, report.txt, confusion.svg
//   run_log.jsonl                                  gateway attempts
// Per-item failures are recorded in the report; configuration problems
// throw ConfigError.
RunResult run_har(const RunConfig& config, const RunHooks& hooks = {});
RunResult run_vqa(const RunConfig& config, VqaMode mode, const RunHooks& hooks = {});
RunResult run(const RunConfig& config, const RunHooks& hooks = {});

struct ExportResult {
  std::string path;  // <output_dir>/train.jsonl
  std::size_t records = 0;
  std::vector<ItemError> errors;
  std::size_t network_calls = 0;

  int exit_code() const;
};

// Runs up to prompt construction (no generate calls) and writes one
// PromptRecord per item with the gold label as target.
ExportResult export_training_data(const RunConfig& config, const RunHooks& hooks = {});

// Reads <run_dir>/report.json.
EvalReport load_run_report(const std::string& run_dir);

}  // namespace cola
