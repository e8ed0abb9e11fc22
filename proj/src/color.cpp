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

#include "cola/color.hpp"

#include <cmath>

#include "cola/error.hpp"
#include "cola/kernels.hpp"
#include "detail/luv_pixel.hpp"

namespace cola {

namespace detail {

const std::array<double, 256>& srgb_decode_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return t;
  }();
  return table;
}

const WhitePoint& luv_white() {
  static const WhitePoint white = [] {
    const double x = kM[0][0] * 1.0 + kM[0][1] * 1.0 + kM[0][2] * 1.0;
    const double y = kM[1][0] * 1.0 + kM[1][1] * 1.0 + kM[1][2] * 1.0;
    const double z = kM[2][0] * 1.0 + kM[2][1] * 1.0 + kM[2][2] * 1.0;
    const double d = x + 15.0 * y + 3.0 * z;
    return WhitePoint{y, 4.0 * x / d, 9.0 * y / d};
  }();
  return white;
}

}  // namespace detail

double srgb_to_linear(std::uint8_t code) { return detail::srgb_decode_table()[code]; }

Luv srgb_to_luv(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return detail::pixel_to_luv(r, g, b);
}

LuvPlanes rgb_to_luv(const Frame& frame) {
  validate_frame(frame);
  LuvPlanes out;
  out.width = frame.width;
  out.height = frame.height;
  out.data.resize(frame.pixel_count() * 3);
  kernels::omp::rgb_to_luv(frame.pixels, out.data);
  return out;
}

double luv_frame_diff(const LuvPlanes& a, const LuvPlanes& b) {
  if (a.width != b.width || a.height != b.height || a.data.size() != b.data.size()) {
    throw InvalidArgument("LUV dimension mismatch: " + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                          std::to_string(b.height));
  }
  if (a.data.empty()) return 0.0;
  return kernels::omp::mean_abs_diff(a.data, b.data);
}

}  // namespace cola
