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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "cola/error.hpp"
#include "cola/frame.hpp"

namespace cola {

FramestreamHeader parse_framestream_header(const std::string& line) {
  std::istringstream in(line);
  std::string magic;
  int version = 0;
  FramestreamHeader h;
  if (!(in >> magic >> version >> h.width >> h.height >> h.fps_milli >> h.count)) {
    throw FormatError("malformed framestream header: '" + line + "'");
  }
  std::string extra;
  if (in >> extra) throw FormatError("trailing tokens in framestream header: '" + line + "'");
  if (magic != "FRAMESTREAM") throw FormatError("bad framestream magic: '" + magic + "'");
  if (version != 1) throw FormatError("unsupported framestream version " + std::to_string(version));
  if (h.width < 1 || h.height < 1) throw FormatError("framestream dimensions must be positive");
  if (h.width > kMaxFrameDim || h.height > kMaxFrameDim) {
    throw FormatError("framestream frame size " + std::to_string(h.width) + "x" +
                      std::to_string(h.height) + " exceeds " + std::to_string(kMaxFrameDim));
  }
  if (h.fps_milli < 0) throw FormatError("negative fps_milli in framestream header");
  if (h.count < -1) throw FormatError("framestream count must be >= -1");
  return h;
}

std::string format_framestream_header(const FramestreamHeader& h) {
  return "FRAMESTREAM 1 " + std::to_string(h.width) + " " + std::to_string(h.height) + " " +
         std::to_string(h.fps_milli) + " " + std::to_string(h.count) + "\n";
}

void write_framestream(std::ostream& out, std::span<const Frame> frames, std::int64_t fps_milli,
                       bool declare_count) {
  FramestreamHeader h;
  h.fps_milli = fps_milli;
  h.count = declare_count ? static_cast<std::int64_t>(frames.size()) : -1;
  if (!frames.empty()) {
    h.width = frames.front().width;
    h.height = frames.front().height;
  } else {
    h.width = h.height = 1;
  }
  out << format_framestream_header(h);
  for (const auto& f : frames) {
    validate_frame(f);
    if (f.width != h.width || f.height != h.height) {
      throw InvalidArgument("framestream frames must share one size");
    }
    out.write(reinterpret_cast<const char*>(f.pixels.data()),
              static_cast<std::streamsize>(f.pixels.size()));
  }
  if (!out) throw IoError("failed writing framestream");
}

void write_framestream_file(const std::string& path, std::span<const Frame> frames,
                            std::int64_t fps_milli, bool declare_count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_framestream(out, frames, fps_milli, declare_count);
}

namespace {

// Reads up to n bytes; returns how many arrived (fewer only at EOF).
using ByteReader = std::function<std::size_t(std::uint8_t*, std::size_t)>;

class FramestreamReader : public FrameStream {
 public:
  FramestreamReader(std::string name, ByteReader reader, std::optional<double> fps_hint)
      : name_(std::move(name)), reader_(std::move(reader)), fps_hint_(fps_hint) {}

  void read_header() {
    std::string line;
    std::uint8_t c = 0;
    while (true) {
      if (reader_(&c, 1) != 1) {
        throw FormatError(name_ + ": malformed stream header (EOF before newline)");
      }
      if (c == '\n') break;
      line.push_back(static_cast<char>(c));
      if (line.size() > 256) throw FormatError(name_ + ": malformed stream header (too long)");
    }
    header_ = parse_framestream_header(line);
    if (header_.fps_milli > 0) {
      fps_ = static_cast<double>(header_.fps_milli) / 1000.0;
    } else {
      fps_ = fps_hint_.value_or(kDefaultFps);
    }
  }

 protected:
  std::optional<Frame> read_next() override {
    if (header_.count >= 0 && produced_ >= header_.count) return std::nullopt;
    const std::size_t need = static_cast<std::size_t>(header_.width) *
                             static_cast<std::size_t>(header_.height) * 3;
    Frame f;
    f.width = header_.width;
    f.height = header_.height;
    f.pixels.resize(need);
    const std::size_t got = reader_(f.pixels.data(), need);
    if (got == 0 && header_.count < 0) return std::nullopt;
    if (got == 0) {
      throw FormatError(name_ + ": stream ended after " + std::to_string(produced_) + " of " +
                        std::to_string(header_.count) + " declared frames");
    }
    if (got != need) {
      throw FormatError(name_ + ": truncated frame " + std::to_string(produced_) + ": expected " +
                        std::to_string(need) + " bytes, received " + std::to_string(got));
    }
    f.index = produced_;
    f.timestamp_ms = synth_timestamp_ms(produced_, fps_);
    ++produced_;
    return f;
  }

  std::int64_t produced() const { return produced_; }

 private:
  std::string name_;
  ByteReader reader_;
  std::optional<double> fps_hint_;
  FramestreamHeader header_;
  double fps_ = kDefaultFps;
  std::int64_t produced_ = 0;
};

class FramestreamFile final : public FramestreamReader {
 public:
  FramestreamFile(const std::string& path, std::optional<double> fps_hint)
      : FramestreamReader(path, make_reader(path), fps_hint) {
    read_header();
  }

 private:
  static ByteReader make_reader(const std::string& path) {
    auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
    if (!*file) throw IoError("unreadable file: " + path);
    return [file](std::uint8_t* buf, std::size_t n) {
      file->read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
      return static_cast<std::size_t>(file->gcount());
    };
  }
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

struct Pipe {
  FILE* file = nullptr;
  ~Pipe() {
    if (file) pclose(file);
  }
};

class DecoderStream final : public FramestreamReader {
 public:
  DecoderStream(const std::string& command, std::optional<double> fps_hint)
      : DecoderStream(command, fps_hint, spawn(command)) {}

 protected:
  std::optional<Frame> read_next() override {
    try {
      auto f = FramestreamReader::read_next();
      if (!f) {
        const int status = close_pipe();
        if (status != 0 && produced() == 0) {
          throw IoError("decoder exited with status " + std::to_string(status) +
                        " before first frame: " + command_);
        }
      }
      return f;
    } catch (const FormatError&) {
      close_pipe();
      throw;
    }
  }

 private:
  DecoderStream(const std::string& command, std::optional<double> fps_hint,
                std::shared_ptr<Pipe> pipe)
      : FramestreamReader(command, reader_for(pipe), fps_hint),
        command_(command),
        pipe_(std::move(pipe)) {
    try {
      read_header();
    } catch (const FormatError&) {
      const int status = close_pipe();
      if (status != 0) {
        throw IoError("decoder exited with status " + std::to_string(status) +
                      " before first frame: " + command_);
      }
      throw;
    }
  }

  static std::shared_ptr<Pipe> spawn(const std::string& command) {
    auto pipe = std::make_shared<Pipe>();
    pipe->file = popen(command.c_str(), "r");
    if (!pipe->file) throw IoError("cannot spawn decoder: " + command);
    return pipe;
  }

  static ByteReader reader_for(std::shared_ptr<Pipe> pipe) {
    return [pipe](std::uint8_t* buf, std::size_t n) {
      std::size_t total = 0;
      while (pipe->file && total < n) {
        const std::size_t r = std::fread(buf + total, 1, n - total, pipe->file);
        if (r == 0) break;
        total += r;
      }
      return total;
    };
  }

  int close_pipe() {
    if (!pipe_->file) return exit_status_;
    // Drain so the child never blocks on a full pipe while we wait on it.
    char sink[4096];
    while (std::fread(sink, 1, sizeof(sink), pipe_->file) > 0) {
    }
    const int status = pclose(pipe_->file);
    pipe_->file = nullptr;
    exit_status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
    return exit_status_;
  }

  std::string command_;
  std::shared_ptr<Pipe> pipe_;
  int exit_status_ = 0;
};

}  // namespace

std::unique_ptr<FrameStream> open_framestream_file(const FrameSource& source) {
  if (!std::filesystem::exists(source.uri)) throw IoError("missing path: " + source.uri);
  return std::make_unique<FramestreamFile>(source.uri, source.fps_hint);
}

std::unique_ptr<FrameStream> open_decoder_subprocess(const FrameSource& source) {
  if (source.decoder_command.find("{input}") == std::string::npos) {
    throw ConfigError("decoder command must contain an {input} placeholder");
  }
  if (!std::filesystem::exists(source.uri)) throw IoError("missing path: " + source.uri);
  std::string cmd = source.decoder_command;
  const auto pos = cmd.find("{input}");
  cmd.replace(pos, 7, shell_quote(source.uri));
  return std::make_unique<DecoderStream>(cmd, source.fps_hint);
}

}  // namespace cola
