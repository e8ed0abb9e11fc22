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

#include <span>
#include <string>
#include <vector>

#include "cola/embedding.hpp"
#include "cola/frame.hpp"

namespace cola {

class Gateway;

// Throws InvalidArgument on length mismatch or a zero-norm input.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct EndpointAnswer {
  std::string endpoint;
  std::string text;
};

// Mean scores this close to the maximum are treated as tied.
inline constexpr double kTieEpsilon = 1e-12;

struct ChoiceScores {
  std::vector<double> mean;                       // s[j], one per choice
  std::vector<std::vector<double>> per_endpoint;  // P[i][j]
  std::size_t chosen_index = 0;                   // argmax of mean, lowest index on ties
};

// Averaging ensemble: P[i][j] = cos(embed(answer_i), embed(choice_j)),
// s = column means of P. Embedding failures are rethrown as EndpointError
// naming the endpoint whose answer was being embedded.
ChoiceScores ensemble_scores(std::span<const EndpointAnswer> answers,
                             std::span<const std::string> choices, TextEmbedder& embedder);

struct EnsemblePrediction {
  ChoiceScores scores;
  std::vector<EndpointAnswer> answers;
};

// Asks every endpoint the question (choices forwarded) and scores the answers.
EnsemblePrediction ensemble_predict(Gateway& gateway, const Frame& image, const std::string& question,
                                    const std::vector<std::string>& choices,
                                    std::span<const std::string> endpoints, TextEmbedder& embedder);

}  // namespace cola
