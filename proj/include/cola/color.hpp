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

#include <cstdint>
#include <vector>

#include "cola/frame.hpp"

namespace cola {

// CIELUV under D65. The reference white is the sRGB matrix applied to
// linear (1,1,1), so sRGB white lands exactly on L*=100, u*=v*=0.
struct Luv {
  double l = 0.0;
  double u = 0.0;
  double v = 0.0;
};

// IEC 61966-2-1 piecewise decode of an 8-bit sRGB code value to [0,1].
double srgb_to_linear(std::uint8_t code);

Luv srgb_to_luv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Planar L*, u*, v* for one frame: data = [L plane | u plane | v plane].
struct LuvPlanes {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  double l(std::size_t i) const { return data[i]; }
  double u(std::size_t i) const { return data[pixel_count() + i]; }
  double v(std::size_t i) const { return data[2 * pixel_count() + i]; }
};

LuvPlanes rgb_to_luv(const Frame& frame);

// Mean over all pixels and channels of |a - b|. Throws on size mismatch.
double luv_frame_diff(const LuvPlanes& a, const LuvPlanes& b);

}  // namespace cola
