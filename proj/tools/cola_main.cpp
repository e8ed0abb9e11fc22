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

#include <csignal>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cola/config.hpp"
#include "cola/error.hpp"
#include "cola/keyframe.hpp"
#include "cola/log.hpp"
#include "cola/mock_server.hpp"
#include "cola/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, const std::string& task, const std::string& mode) {
  auto cfg = cola::load_run_config(config_path);
  if (!task.empty()) cfg.task = cola::parse_task(task);
  if (!mode.empty()) cfg.mode = cola::parse_vqa_mode(mode);
  const auto result = cola::run(cfg);
  const auto& r = result.report;
  std::cout << cola::report_text(r);
  std::cout << "\noutput: " << cfg.output_dir << "\n"
            << "network calls: " << result.network_calls << ", cache hits: " << result.cache_hits
            << ", cache misses: " << result.cache_misses << "\n";
  return result.exit_code();
}

int cmd_extract(const std::string& video, const std::string& out, int max_frames,
                const std::string& decoder, double fps) {
  cola::SelectionParams params;
  params.max_keyframes = max_frames;
  try {
    params.validate();
  } catch (const cola::InvalidArgument& e) {
    throw cola::ConfigError(e.what());
  }
  auto source = cola::infer_frame_source(video, decoder);
  if (fps > 0) source.fps_hint = fps;
  auto stream = cola::open_frame_source(source);
  auto id = fs::path(video).filename().string();
  if (const auto dot = id.rfind('.'); dot != std::string::npos && dot > 0) id.resize(dot);
  const auto kfs = cola::select_keyframes(*stream, params, id);
  cola::write_keyframes(out, id, kfs);
  for (const auto& kf : kfs) {
    std::cout << "cluster " << kf.cluster_id << ": frame " << kf.frame.index << " @ "
              << kf.frame.timestamp_ms << " ms\n";
  }
  std::cout << kfs.size() << " keyframe(s) written to " << (fs::path(out) / id).string() << "\n";
  return kfs.empty() ? cola::kExitItemErrors : cola::kExitOk;
}

int cmd_export(const std::string& config_path) {
  const auto cfg = cola::load_run_config(config_path);
  const auto r = cola::export_training_data(cfg);
  std::cout << r.records << " record(s) written to " << r.path << "\n";
  for (const auto& e : r.errors) std::cout << "error " << e.item_id << ": " << e.message << "\n";
  return r.exit_code();
}

int cmd_serve(const std::string& fixtures_path, int port, const std::string& host) {
  cola::MockFixtures fixtures;
  try {
    fixtures = cola::MockFixtures::load(fixtures_path);
  } catch (const cola::FormatError& e) {
    throw cola::ConfigError(e.what());
  }
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  cola::MockServer server(std::move(fixtures));
  const int bound = server.start(port, host);
  std::cout << "mock model server listening on http://" << host << ":" << bound << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.wait();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "served " << server.request_count() << " request(s)\n";
  return cola::kExitOk;
}

int cmd_report(const std::string& run_dir) {
  std::cout << cola::report_text(cola::load_run_report(run_dir));
  return cola::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cola: keyframe selection and multi-model VQA/HAR coordination"};
  app.require_subcommand(1);
  std::string log_level;
  app.add_option("--log-level", log_level, "debug|info|warning|error|off (default: COLA_LOG or warning)");

  std::string config, task, mode;
  auto* run = app.add_subcommand("run", "Run a configured evaluation");
  run->add_option("--config", config, "Run config (JSON)")->required();
  run->add_option("--task", task, "Override the task")->check(CLI::IsMember({"har", "vqa", "vqa-mcq"}));
  run->add_option("--mode", mode, "VQA paradigm")->check(CLI::IsMember({"ensemble", "cola"}));

  std::string video, out, decoder = "ffmpeg -v error -i {input} -f rawvideo -pix_fmt rgb24 -";
  int max_frames = 10;
  double fps = 0;
  auto* extract = app.add_subcommand("extract-keyframes", "Select keyframes from one video");
  extract->add_option("--video", video, "Framestream file, image directory or video file")->required();
  extract->add_option("--out", out, "Output directory")->required();
  extract->add_option("--max-frames", max_frames, "Keyframe cap")->check(CLI::PositiveNumber);
  extract->add_option("--decoder", decoder, "Decoder command template with {input}");
  extract->add_option("--fps", fps, "Frame rate for sources without one");

  auto* export_train = app.add_subcommand("export-train", "Write prompt/target pairs for fine-tuning");
  export_train->add_option("--config", config, "Run config (JSON)")->required();

  std::string fixtures, host = "127.0.0.1";
  int port = 8765;
  auto* serve = app.add_subcommand("serve-mock", "Serve the model protocol from fixtures");
  serve->add_option("--fixtures", fixtures, "Fixture file (JSON)")->required();
  serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Print the report of a finished run");
  report->add_option("--run", run_dir, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cola::kExitConfigError;
  }

  try {
    if (!log_level.empty()) {
      static const std::map<std::string, cola::log::Level> levels{
          {"debug", cola::log::Level::kDebug}, {"info", cola::log::Level::kInfo},
          {"warning", cola::log::Level::kWarning}, {"error", cola::log::Level::kError},
          {"off", cola::log::Level::kOff}};
      const auto it = levels.find(log_level);
      if (it == levels.end()) throw cola::ConfigError("unknown log level '" + log_level + "'");
      cola::log::set_threshold(it->second);
    }
    if (*run) return cmd_run(config, task, mode);
    if (*extract) return cmd_extract(video, out, max_frames, decoder, fps);
    if (*export_train) return cmd_export(config);
    if (*serve) return cmd_serve(fixtures, port, host);
    if (*report) return cmd_report(run_dir);
  } catch (const cola::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cola::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cola::kExitTotalFailure;
  }
  return cola::kExitOk;
}
