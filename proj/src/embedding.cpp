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

#include "cola/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>

#include "cola/error.hpp"

namespace cola {

namespace {

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

}  // namespace

Embedding trigram_embedding(std::string_view text, int dim) {
  if (dim < 1) throw InvalidArgument("embedding dimension must be >= 1");
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) throw InvalidArgument("cannot embed empty text");
  auto end = text.find_last_not_of(" \t\r\n");
  std::string padded = " ";
  for (char c : text.substr(begin, end - begin + 1)) {
    padded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  padded.push_back(' ');

  Embedding v(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    v[fnv1a(std::string_view(padded).substr(i, 3)) % static_cast<std::uint32_t>(dim)] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace cola
