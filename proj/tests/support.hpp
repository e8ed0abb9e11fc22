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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cola/frame.hpp"

namespace cola::test {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "cola-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
}

inline std::string source_dir() { return COLA_SOURCE_DIR; }

inline Frame random_frame(std::mt19937_64& rng, int w, int h, std::int64_t index = 0) {
  Frame f;
  f.index = index;
  f.width = w;
  f.height = h;
  f.pixels.resize(f.pixel_count() * 3);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return f;
}

// Noise texture around a base colour; the same seed always yields the same frame.
inline Frame textured_frame(int w, int h, int r, int g, int b, std::uint64_t seed, int amplitude = 24,
                            std::int64_t index = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(-amplitude, amplitude);
  Frame f;
  f.index = index;
  f.width = w;
  f.height = h;
  f.pixels.resize(f.pixel_count() * 3);
  auto clamp8 = [](int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); };
  for (std::size_t p = 0; p < f.pixel_count(); ++p) {
    f.pixels[3 * p] = clamp8(r + noise(rng));
    f.pixels[3 * p + 1] = clamp8(g + noise(rng));
    f.pixels[3 * p + 2] = clamp8(b + noise(rng));
  }
  return f;
}

// Independent scalar CIELUV oracle: closed-form sRGB decode (no table),
// explicit XYZ, white from the same matrix rows summed.
struct LuvOracle {
  double l, u, v;
};

inline LuvOracle luv_oracle(int r8, int g8, int b8) {
  auto decode = [](int c) {
    const double x = c / 255.0;
    return x <= 0.04045 ? x / 12.92 : std::pow((x + 0.055) / 1.055, 2.4);
  };
  const double r = decode(r8), g = decode(g8), b = decode(b8);
  const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double Xn = 0.4124564 + 0.3575761 + 0.1804375;
  const double Yn = 0.2126729 + 0.7151522 + 0.0721750;
  const double Zn = 0.0193339 + 0.1191920 + 0.9503041;
  const double den = X + 15 * Y + 3 * Z;
  if (den <= 0) return {0, 0, 0};
  const double up = 4 * X / den, vp = 9 * Y / den;
  const double dn = Xn + 15 * Yn + 3 * Zn;
  const double upn = 4 * Xn / dn, vpn = 9 * Yn / dn;
  const double yr = Y / Yn;
  const double L = yr > std::pow(6.0 / 29.0, 3) ? 116 * std::cbrt(yr) - 16 : std::pow(29.0 / 3.0, 3) * yr;
  return {L, 13 * L * (up - upn), 13 * L * (vp - vpn)};
}

// Shannon entropy (bits) of the rounded Rec.601 luma of every pixel.
inline double entropy_oracle(const Frame& f) {
  std::vector<double> hist(256, 0.0);
  for (std::size_t p = 0; p < f.pixel_count(); ++p) {
    const double y = 0.299 * f.pixels[3 * p] + 0.587 * f.pixels[3 * p + 1] + 0.114 * f.pixels[3 * p + 2];
    hist[static_cast<std::size_t>(std::floor(y + 0.5 + 1e-9))] += 1;
  }
  double h = 0;
  for (double c : hist) {
    if (c > 0) {
      const double p = c / static_cast<double>(f.pixel_count());
      h -= p * std::log2(p);
    }
  }
  return h;
}

inline double brightness_oracle(const Frame& f) {
  long double s = 0;
  for (std::size_t p = 0; p < f.pixel_count(); ++p) {
    s += 0.299L * f.pixels[3 * p] + 0.587L * f.pixels[3 * p + 1] + 0.114L * f.pixels[3 * p + 2];
  }
  return static_cast<double>(s / f.pixel_count());
}

// Variance of the 4-neighbour Laplacian of float luma, clamped borders.
inline double laplacian_oracle(const Frame& f) {
  const int w = f.width, h = f.height;
  auto Y = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    const auto* p = &f.pixels[3 * (static_cast<std::size_t>(y) * w + x)];
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  };
  std::vector<double> resp;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) resp.push_back(Y(x - 1, y) + Y(x + 1, y) + Y(x, y - 1) + Y(x, y + 1) - 4 * Y(x, y));
  }
  double mean = 0;
  for (double r : resp) mean += r;
  mean /= static_cast<double>(resp.size());
  double ss = 0;
  for (double r : resp) ss += (r - mean) * (r - mean);
  return ss / static_cast<double>(resp.size());
}

inline double wcss(const std::vector<std::vector<double>>& pts, const std::vector<int>& assign, int k) {
  const std::size_t dim = pts.empty() ? 0 : pts[0].size();
  double total = 0;
  for (int c = 0; c < k; ++c) {
    std::vector<double> mean(dim, 0.0);
    int n = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (assign[i] != c) continue;
      ++n;
      for (std::size_t d = 0; d < dim; ++d) mean[d] += pts[i][d];
    }
    if (n == 0) continue;
    for (auto& m : mean) m /= n;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (assign[i] != c) continue;
      for (std::size_t d = 0; d < dim; ++d) total += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
    }
  }
  return total;
}

// Exhaustive search over set partitions of pts into exactly k non-empty
// blocks (restricted growth strings). Returns the minimal-WCSS labelling in
// canonical form (first occurrence order).
inline std::vector<int> brute_force_partition(const std::vector<std::vector<double>>& pts, int k,
                                              double* best_cost = nullptr) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> cur(n, 0), best;
  double best_val = INFINITY;
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (n - i < k - used) return;
    if (i == n) {
      if (used != k) return;
      const double v = wcss(pts, cur, k);
      if (v < best_val - 1e-12) {
        best_val = v;
        best = cur;
      }
      return;
    }
    for (int c = 0; c <= std::min(used, k - 1); ++c) {
      cur[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  if (best_cost) *best_cost = best_val;
  return best;
}

// Relabels clusters in order of first appearance.
inline std::vector<int> canonical_labels(const std::vector<int>& a) {
  std::vector<int> map;
  std::vector<int> out;
  for (int x : a) {
    if (x >= static_cast<int>(map.size())) map.resize(x + 1, -1);
    if (map[x] < 0) map[x] = *std::max_element(map.begin(), map.end()) + 1;
    out.push_back(map[x]);
  }
  return out;
}

}  // namespace cola::test
