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

#include "cola/metrics.hpp"

#include <algorithm>
#include <map>

#include "cola/error.hpp"

namespace cola {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : classes(std::move(class_names)),
      counts(classes.size(), std::vector<std::uint64_t>(classes.size(), 0)),
      unmatched(classes.size(), 0) {}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (std::size_t r = 0; r < size(); ++r) t += row_total(r);
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < size(); ++c) t += counts[c][c];
  return t;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t actual) const {
  std::uint64_t t = unmatched[actual];
  for (auto v : counts[actual]) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::column_total(std::size_t predicted) const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row[predicted];
  return t;
}

void ConfusionMatrix::add(std::size_t actual, std::optional<std::size_t> predicted) {
  if (actual >= size()) throw InvalidArgument("actual class index out of range");
  if (predicted && *predicted < size()) {
    ++counts[actual][*predicted];
  } else {
    ++unmatched[actual];
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (classes != other.classes) throw InvalidArgument("cannot merge matrices over different classes");
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t c = 0; c < size(); ++c) counts[r][c] += other.counts[r][c];
    unmatched[r] += other.unmatched[r];
  }
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const std::optional<std::string>> predicted,
                                 std::span<const std::string> gold,
                                 std::span<const std::string> classes) {
  if (predicted.size() != gold.size()) {
    throw InvalidArgument("prediction/gold length mismatch: " + std::to_string(predicted.size()) +
                          " vs " + std::to_string(gold.size()));
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!index.emplace(classes[i], i).second) {
      throw InvalidArgument("duplicate class '" + classes[i] + "'");
    }
  }
  ConfusionMatrix cm({classes.begin(), classes.end()});
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = index.find(gold[i]);
    if (g == index.end()) throw InvalidArgument("gold label '" + gold[i] + "' is not a class");
    std::optional<std::size_t> p;
    if (predicted[i]) {
      if (auto it = index.find(*predicted[i]); it != index.end()) p = it->second;
    }
    cm.add(g->second, p);
  }
  return cm;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

PrfTable per_class_prf(const ConfusionMatrix& cm) {
  PrfTable t;
  const std::size_t n = cm.size();
  t.per_class.resize(n);
  std::uint64_t total_support = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const double tp = static_cast<double>(cm.counts[c][c]);
    const auto predicted = cm.column_total(c);
    const auto actual = cm.row_total(c);
    auto& row = t.per_class[c];
    row.support = actual;
    row.prf.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    row.prf.recall = actual ? tp / static_cast<double>(actual) : 0.0;
    row.prf.f1 = f1_score(row.prf.precision, row.prf.recall);
    total_support += actual;
  }
  std::size_t active = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const auto& row = t.per_class[c];
    if (row.support == 0 && cm.column_total(c) == 0) continue;
    ++active;
    t.macro.precision += row.prf.precision;
    t.macro.recall += row.prf.recall;
    t.macro.f1 += row.prf.f1;
    if (total_support) {
      const double w = static_cast<double>(row.support) / static_cast<double>(total_support);
      t.weighted.precision += w * row.prf.precision;
      t.weighted.recall += w * row.prf.recall;
      t.weighted.f1 += w * row.prf.f1;
    }
  }
  if (active == 0) return t;
  t.macro.precision /= static_cast<double>(active);
  t.macro.recall /= static_cast<double>(active);
  t.macro.f1 /= static_cast<double>(active);
  return t;
}

double mcq_accuracy(std::span<const std::optional<std::size_t>> predicted,
                    std::span<const std::size_t> gold) {
  if (predicted.size() != gold.size()) {
    throw InvalidArgument("prediction/gold length mismatch: " + std::to_string(predicted.size()) +
                          " vs " + std::to_string(gold.size()));
  }
  if (gold.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] && *predicted[i] == gold[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double micro_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  return total ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;
}

EvalReport make_report(std::string task, ConfusionMatrix cm, std::optional<double> accuracy,
                       std::size_t evaluated, std::vector<ItemError> errors) {
  EvalReport r;
  r.task = std::move(task);
  r.prf = per_class_prf(cm);
  r.matrix = std::move(cm);
  r.accuracy = accuracy;
  r.evaluated = evaluated;
  r.errors = std::move(errors);
  return r;
}

}  // namespace cola
