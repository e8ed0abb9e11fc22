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

#include "cola/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace cola::log {

namespace {

Level from_env() {
  const char* env = std::getenv("COLA_LOG");
  if (!env) return Level::kWarning;
  const std::string v(env);
  if (v == "debug") return Level::kDebug;
  if (v == "info") return Level::kInfo;
  if (v == "error") return Level::kError;
  if (v == "off") return Level::kOff;
  return Level::kWarning;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{from_env()};
  return level;
}

constexpr const char* kNames[] = {"debug", "info", "warning", "error"};

}  // namespace

Level threshold() { return current().load(); }
void set_threshold(Level level) { current().store(level); }

void write(Level level, std::string_view message) {
  if (level < threshold() || level == Level::kOff) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "[cola " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace cola::log
