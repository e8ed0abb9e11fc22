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

#include "cola/frame.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cola/error.hpp"
#include "cola/image_io.hpp"

namespace fs = std::filesystem;

namespace cola {

std::unique_ptr<FrameStream> open_framestream_file(const FrameSource& source);
std::unique_ptr<FrameStream> open_decoder_subprocess(const FrameSource& source);

void validate_frame(const Frame& frame) {
  if (frame.width < 1 || frame.height < 1) {
    throw InvalidArgument("frame dimensions must be positive, got " + std::to_string(frame.width) +
                          "x" + std::to_string(frame.height));
  }
  if (frame.width > kMaxFrameDim || frame.height > kMaxFrameDim) {
    throw InvalidArgument("frame " + std::to_string(frame.width) + "x" +
                          std::to_string(frame.height) + " exceeds the " +
                          std::to_string(kMaxFrameDim) + " pixel limit");
  }
  if (frame.pixels.size() != frame.pixel_count() * 3) {
    throw InvalidArgument("pixel buffer holds " + std::to_string(frame.pixels.size()) +
                          " bytes, expected " + std::to_string(frame.pixel_count() * 3));
  }
}

Frame solid_frame(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                  std::int64_t index) {
  Frame f;
  f.index = index;
  f.width = width;
  f.height = height;
  f.pixels.resize(f.pixel_count() * 3);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    f.pixels[3 * i] = r;
    f.pixels[3 * i + 1] = g;
    f.pixels[3 * i + 2] = b;
  }
  return f;
}

std::int64_t synth_timestamp_ms(std::int64_t k, double fps) {
  if (!(fps > 0.0)) throw InvalidArgument("fps must be positive");
  // The epsilon keeps exact rates like 10 fps from landing one ms low.
  return static_cast<std::int64_t>(std::floor(static_cast<double>(k) * 1000.0 / fps + 1e-9));
}

std::optional<Frame> FrameStream::next() {
  if (finished_) return std::nullopt;
  auto frame = read_next();
  if (!frame) finished_ = true;
  return frame;
}

std::vector<Frame> read_all_frames(FrameStream& stream) {
  std::vector<Frame> frames;
  while (auto f = stream.next()) frames.push_back(std::move(*f));
  return frames;
}

FrameSource infer_frame_source(const std::string& path, const std::string& decoder_command) {
  FrameSource src;
  src.uri = path;
  const fs::path p(path);
  if (fs::is_directory(p)) {
    src.kind = SourceKind::kImageDirectory;
  } else if (p.extension() == ".fs" || p.extension() == ".framestream") {
    src.kind = SourceKind::kFramestream;
  } else {
    src.kind = SourceKind::kDecoderSubprocess;
    src.decoder_command = decoder_command;
  }
  return src;
}

namespace {

class ImageDirectoryStream final : public FrameStream {
 public:
  ImageDirectoryStream(std::vector<std::string> files, double fps)
      : files_(std::move(files)), fps_(fps) {}

 protected:
  std::optional<Frame> read_next() override {
    if (pos_ >= files_.size()) return std::nullopt;
    const auto& file = files_[pos_];
    Frame f;
    try {
      f = read_image_file(file);
    } catch (const Error& e) {
      pos_ = files_.size();
      throw IoError("undecodable image " + file + ": " + e.what());
    }
    f.index = static_cast<std::int64_t>(pos_);
    f.timestamp_ms = synth_timestamp_ms(f.index, fps_);
    ++pos_;
    return f;
  }

 private:
  std::vector<std::string> files_;
  double fps_;
  std::size_t pos_ = 0;
};

std::unique_ptr<FrameStream> open_image_directory(const FrameSource& source) {
  const fs::path dir(source.uri);
  if (!fs::exists(dir)) throw IoError("missing path: " + source.uri);
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + source.uri);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    const bool match = std::any_of(source.globs.begin(), source.globs.end(), [&](const auto& g) {
      return fnmatch(g.c_str(), name.c_str(), 0) == 0;
    });
    if (match) files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return std::make_unique<ImageDirectoryStream>(std::move(files),
                                                source.fps_hint.value_or(kDefaultFps));
}

}  // namespace

std::unique_ptr<FrameStream> open_frame_source(const FrameSource& source) {
  if (source.fps_hint && !(*source.fps_hint > 0.0)) {
    throw InvalidArgument("fps_hint must be positive");
  }
  switch (source.kind) {
    case SourceKind::kImageDirectory:
      return open_image_directory(source);
    case SourceKind::kFramestream:
      return open_framestream_file(source);
    case SourceKind::kDecoderSubprocess:
      return open_decoder_subprocess(source);
  }
  throw InvalidArgument("unknown frame source kind");
}

}  // namespace cola
