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

#include <array>
#include <cmath>
#include <cstdint>

#include "cola/color.hpp"

namespace cola::detail {

// sRGB (D65) linear RGB -> XYZ.
inline constexpr double kM[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

inline constexpr double kEpsilon = 216.0 / 24389.0;  // (6/29)^3
inline constexpr double kKappa = 24389.0 / 27.0;     // (29/3)^3

const std::array<double, 256>& srgb_decode_table();

struct WhitePoint {
  double y;
  double un;
  double vn;
};

const WhitePoint& luv_white();

inline Luv linear_to_luv(double r, double g, double b, const WhitePoint& w) {
  const double x = kM[0][0] * r + kM[0][1] * g + kM[0][2] * b;
  const double y = kM[1][0] * r + kM[1][1] * g + kM[1][2] * b;
  const double z = kM[2][0] * r + kM[2][1] * g + kM[2][2] * b;
  const double denom = x + 15.0 * y + 3.0 * z;
  if (denom <= 0.0) return {};
  const double yr = y / w.y;
  const double l = yr > kEpsilon ? 116.0 * std::cbrt(yr) - 16.0 : kKappa * yr;
  const double up = 4.0 * x / denom;
  const double vp = 9.0 * y / denom;
  return {l, 13.0 * l * (up - w.un), 13.0 * l * (vp - w.vn)};
}

inline Luv pixel_to_luv(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const auto& t = srgb_decode_table();
  return linear_to_luv(t[r], t[g], t[b], luv_white());
}

}  // namespace cola::detail
