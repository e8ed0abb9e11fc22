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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cola {

inline constexpr int kMaxFrameDim = 4096;
inline constexpr double kDefaultFps = 25.0;

// Decoded RGB24 raster, row-major, with its position in the source.
struct Frame {
  std::int64_t index = 0;
  std::int64_t timestamp_ms = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::span<const std::uint8_t> rgb() const noexcept { return pixels; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Throws InvalidArgument unless dimensions are in [1, kMaxFrameDim] and the
// buffer holds exactly width*height*3 bytes.
void validate_frame(const Frame& frame);

// Builds a frame of one solid colour; handy for tests and tools.
Frame solid_frame(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                  std::int64_t index = 0);

enum class SourceKind { kImageDirectory, kFramestream, kDecoderSubprocess };

struct FrameSource {
  SourceKind kind = SourceKind::kFramestream;
  // Path for directories and framestream files; the input path substituted
  // into decoder_command for subprocess sources.
  std::string uri;
  std::optional<double> fps_hint;
  std::vector<std::string> globs{"*.png", "*.jpg"};
  // Command template containing "{input}"; must write framestream v1 to stdout.
  std::string decoder_command;
};

// Guesses the source kind from the path: directories are image directories,
// ".fs"/".framestream" files are framestreams, anything else is decoded.
FrameSource infer_frame_source(const std::string& path, const std::string& decoder_command = {});

// Single-consumer pull stream. After end-of-stream every call returns nullopt.
class FrameStream {
 public:
  virtual ~FrameStream() = default;

  std::optional<Frame> next();

 protected:
  virtual std::optional<Frame> read_next() = 0;

 private:
  bool finished_ = false;
};

std::unique_ptr<FrameStream> open_frame_source(const FrameSource& source);

// Same as stream.next(); mirrors the pull-style API used by the pipeline.
inline std::optional<Frame> next_frame(FrameStream& stream) { return stream.next(); }

std::vector<Frame> read_all_frames(FrameStream& stream);

// Timestamp for frame k at the given rate, in whole milliseconds.
std::int64_t synth_timestamp_ms(std::int64_t k, double fps);

// framestream v1: "FRAMESTREAM 1 <w> <h> <fps_milli> <count>\n" + raw RGB24.
struct FramestreamHeader {
  int width = 0;
  int height = 0;
  std::int64_t fps_milli = 0;
  std::int64_t count = -1;  // -1: unknown, read until EOF
};

FramestreamHeader parse_framestream_header(const std::string& line);
std::string format_framestream_header(const FramestreamHeader& header);

// Writes frames as framestream v1. All frames must share one size. When
// declare_count is false the header carries -1.
void write_framestream(std::ostream& out, std::span<const Frame> frames, std::int64_t fps_milli,
                       bool declare_count = true);
void write_framestream_file(const std::string& path, std::span<const Frame> frames,
                            std::int64_t fps_milli, bool declare_count = true);

}  // namespace cola
