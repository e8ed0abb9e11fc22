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

#include "cola/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "cola/error.hpp"
#include "cola/gateway.hpp"

namespace cola {

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("cosine_similarity: dimension mismatch " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw InvalidArgument("cosine_similarity: zero-norm vector");
  const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

ChoiceScores ensemble_scores(std::span<const EndpointAnswer> answers,
                             std::span<const std::string> choices, TextEmbedder& embedder) {
  if (answers.empty()) throw InvalidArgument("ensemble needs at least one endpoint answer");
  if (choices.empty()) throw InvalidArgument("ensemble needs at least one choice");

  std::vector<Embedding> choice_vecs;
  choice_vecs.reserve(choices.size());
  for (const auto& c : choices) choice_vecs.push_back(embedder.embed(c));

  ChoiceScores out;
  out.mean.assign(choices.size(), 0.0);
  for (const auto& a : answers) {
    Embedding av;
    try {
      av = embedder.embed(a.text);
    } catch (const EndpointError&) {
      throw;
    } catch (const Error& e) {
      throw EndpointError(a.endpoint, std::string("embedding answer failed: ") + e.what());
    }
    std::vector<double> row(choices.size());
    for (std::size_t j = 0; j < choices.size(); ++j) {
      try {
        row[j] = cosine_similarity(av, choice_vecs[j]);
      } catch (const InvalidArgument& e) {
        throw EndpointError(a.endpoint, std::string("degenerate embedding: ") + e.what());
      }
    }
    out.per_endpoint.push_back(std::move(row));
  }
  const double n = static_cast<double>(answers.size());
  for (std::size_t j = 0; j < choices.size(); ++j) {
    double s = 0.0;
    for (const auto& row : out.per_endpoint) s += row[j];
    out.mean[j] = s / n;
  }
  // Scores within kTieEpsilon of the maximum count as tied; lowest index wins.
  const double best = *std::max_element(out.mean.begin(), out.mean.end());
  for (std::size_t j = 0; j < out.mean.size(); ++j) {
    if (out.mean[j] >= best - kTieEpsilon) {
      out.chosen_index = j;
      break;
    }
  }
  return out;
}

EnsemblePrediction ensemble_predict(Gateway& gateway, const Frame& image, const std::string& question,
                                    const std::vector<std::string>& choices,
                                    std::span<const std::string> endpoints, TextEmbedder& embedder) {
  if (endpoints.empty()) throw InvalidArgument("ensemble needs at least one VQA endpoint");
  EnsemblePrediction pred;
  for (const auto& name : endpoints) {
    pred.answers.push_back({name, gateway.vqa_answer(name, image, question, choices).text});
  }
  pred.scores = ensemble_scores(pred.answers, choices, embedder);
  return pred;
}

}  // namespace cola
