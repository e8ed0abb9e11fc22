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

#include <string_view>
#include <vector>

namespace cola {

using Embedding = std::vector<double>;

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual Embedding embed(std::string_view text) = 0;
};

inline constexpr int kTrigramDim = 256;

// Hashed character-trigram counts, L2-normalised. The text is trimmed,
// ASCII-lowercased and padded with one space on each side; each trigram is
// hashed with 32-bit FNV-1a into one of `dim` buckets.
Embedding trigram_embedding(std::string_view text, int dim = kTrigramDim);

class TrigramEmbedder final : public TextEmbedder {
 public:
  explicit TrigramEmbedder(int dim = kTrigramDim) : dim_(dim) {}
  Embedding embed(std::string_view text) override { return trigram_embedding(text, dim_); }

 private:
  int dim_;
};

}  // namespace cola
