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

#include "cola/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cstring>

#include "cola/error.hpp"

namespace cola {

namespace {

// OpenCV stores BGR; frames are RGB.
Frame frame_from_bgr(const cv::Mat& bgr) {
  if (bgr.empty()) throw FormatError("empty image");
  if (bgr.type() != CV_8UC3) throw FormatError("expected an 8-bit 3-channel image");
  Frame f;
  f.width = bgr.cols;
  f.height = bgr.rows;
  f.pixels.resize(f.pixel_count() * 3);
  std::size_t o = 0;
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      f.pixels[o++] = row[3 * x + 2];
      f.pixels[o++] = row[3 * x + 1];
      f.pixels[o++] = row[3 * x];
    }
  }
  validate_frame(f);
  return f;
}

cv::Mat bgr_from_frame(const Frame& f) {
  validate_frame(f);
  cv::Mat bgr(f.height, f.width, CV_8UC3);
  std::size_t o = 0;
  for (int y = 0; y < f.height; ++y) {
    auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < f.width; ++x) {
      row[3 * x + 2] = f.pixels[o++];
      row[3 * x + 1] = f.pixels[o++];
      row[3 * x] = f.pixels[o++];
    }
  }
  return bgr;
}

const std::vector<int> kPngParams{cv::IMWRITE_PNG_COMPRESSION, 6};

}  // namespace

Frame read_image_file(const std::string& path) {
  cv::Mat img;
  try {
    img = cv::imread(path, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw IoError("cannot decode " + path + ": " + e.what());
  }
  if (img.empty()) throw IoError("cannot decode " + path);
  try {
    return frame_from_bgr(img);
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", bgr_from_frame(frame), out, kPngParams)) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

Frame decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw FormatError("empty image payload");
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
              const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat img;
  try {
    img = cv::imdecode(buf, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw FormatError(std::string("cannot decode image payload: ") + e.what());
  }
  if (img.empty()) throw FormatError("cannot decode image payload");
  return frame_from_bgr(img);
}

void write_png_file(const std::string& path, const Frame& frame) {
  bool ok = false;
  try {
    ok = cv::imwrite(path, bgr_from_frame(frame), kPngParams);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path);
}

}  // namespace cola
