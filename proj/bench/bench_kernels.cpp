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

// Serial reference vs OpenMP kernels on synthetic frames.
//
//   ./build/bench/cola_bench --benchmark_filter=luv
//   OMP_NUM_THREADS=4 ./build/bench/cola_bench

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "cola/kernels.hpp"

namespace {

namespace k = cola::kernels;

std::vector<std::uint8_t> noise_rgb(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng() & 0xff);
  return px;
}

int side(const benchmark::State& s) { return static_cast<int>(s.range(0)); }

template <auto Fn>
void bm_luv(benchmark::State& state) {
  const int w = side(state), h = side(state);
  const auto rgb = noise_rgb(w, h, 1);
  std::vector<double> luv(static_cast<std::size_t>(w) * h * 3);
  for (auto _ : state) {
    Fn(rgb, luv);
    benchmark::DoNotOptimize(luv.data());
  }
  state.SetItemsProcessed(state.iterations() * w * h);
}

template <auto Fn>
void bm_mad(benchmark::State& state) {
  const int w = side(state), h = side(state);
  std::vector<double> a(static_cast<std::size_t>(w) * h * 3), b(a.size());
  k::serial::rgb_to_luv(noise_rgb(w, h, 1), a);
  k::serial::rgb_to_luv(noise_rgb(w, h, 2), b);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * w * h);
}

template <auto Fn>
void bm_hist(benchmark::State& state) {
  const int w = side(state), h = side(state);
  const auto rgb = noise_rgb(w, h, 3);
  std::vector<std::uint64_t> counts(k::kLumaBins);
  for (auto _ : state) {
    Fn(rgb, w, h, counts);
    benchmark::DoNotOptimize(counts.data());
  }
  state.SetItemsProcessed(state.iterations() * w * h);
}

template <auto Fn>
void bm_channel_hist(benchmark::State& state) {
  const int w = side(state), h = side(state);
  const auto rgb = noise_rgb(w, h, 4);
  std::vector<std::uint64_t> counts(3 * 16);
  for (auto _ : state) {
    Fn(rgb, w, h, 16, counts);
    benchmark::DoNotOptimize(counts.data());
  }
  state.SetItemsProcessed(state.iterations() * w * h);
}

template <auto Fn>
void bm_laplacian(benchmark::State& state) {
  const int w = side(state), h = side(state);
  const auto rgb = noise_rgb(w, h, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(rgb, w, h));
  state.SetItemsProcessed(state.iterations() * w * h);
}

template <auto Fn>
void bm_assign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t dim = 48, kc = 8;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pts(n * dim), cents(kc * dim);
  for (auto& p : pts) p = u(rng);
  for (auto& c : cents) c = u(rng);
  std::vector<int> assignment(n);
  std::vector<double> dist2(n);
  for (auto _ : state) {
    Fn(pts, cents, dim, assignment, dist2);
    benchmark::DoNotOptimize(dist2.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

#define COLA_PAIR(bm, fn, ...)                                            \
  BENCHMARK(bm<k::serial::fn>)->Name(#fn "/serial")->__VA_ARGS__;         \
  BENCHMARK(bm<k::omp::fn>)->Name(#fn "/omp")->UseRealTime()->__VA_ARGS__

COLA_PAIR(bm_luv, rgb_to_luv, Arg(256)->Arg(1024));
COLA_PAIR(bm_mad, mean_abs_diff, Arg(256)->Arg(1024));
COLA_PAIR(bm_hist, luma_histogram, Arg(256)->Arg(1024));
COLA_PAIR(bm_channel_hist, channel_histogram, Arg(256)->Arg(1024));
COLA_PAIR(bm_laplacian, laplacian_variance, Arg(256)->Arg(1024));
COLA_PAIR(bm_assign, assign_nearest, Arg(1 << 12)->Arg(1 << 16));

}  // namespace

BENCHMARK_MAIN();
