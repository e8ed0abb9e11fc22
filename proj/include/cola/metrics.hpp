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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cola {

// Rows are actual classes, columns predicted classes. Predictions that could
// not be mapped to a class land in the per-row `unmatched` column.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::uint64_t> unmatched;

  explicit ConfusionMatrix(std::vector<std::string> class_names = {});

  std::size_t size() const noexcept { return classes.size(); }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_total(std::size_t actual) const;     // includes unmatched
  std::uint64_t column_total(std::size_t predicted) const;

  void add(std::size_t actual, std::optional<std::size_t> predicted);

  // Shard merge; class lists must match.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Predicted labels outside `classes` (or nullopt) count as unmatched. Throws
// InvalidArgument when a gold label is not a class or lengths differ.
ConfusionMatrix confusion_matrix(std::span<const std::optional<std::string>> predicted,
                                 std::span<const std::string> gold,
                                 std::span<const std::string> classes);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassPrf {
  Prf prf;
  std::uint64_t support = 0;
};

// Any ratio with a zero denominator is 0. Macro values are unweighted means
// and weighted values support-weighted means, both over the classes that
// occur as gold or predicted labels; absent classes are listed but not
// averaged.
struct PrfTable {
  std::vector<ClassPrf> per_class;
  Prf macro;
  Prf weighted;
};

PrfTable per_class_prf(const ConfusionMatrix& cm);

double f1_score(double precision, double recall);

// Fraction of predictions equal to gold; nullopt (unmatched) is wrong.
double mcq_accuracy(std::span<const std::optional<std::size_t>> predicted,
                    std::span<const std::size_t> gold);

// trace / total, or 0 for an empty matrix.
double micro_accuracy(const ConfusionMatrix& cm);

struct ItemError {
  std::string item_id;
  std::string message;
};

struct EvalReport {
  std::string task;  // "har" or "vqa-mcq"
  ConfusionMatrix matrix;
  PrfTable prf;
  std::optional<double> accuracy;
  std::size_t evaluated = 0;
  std::vector<ItemError> errors;
};

EvalReport make_report(std::string task, ConfusionMatrix cm, std::optional<double> accuracy,
                       std::size_t evaluated, std::vector<ItemError> errors);

std::string report_json(const EvalReport& report);
std::string report_text(const EvalReport& report);
std::string confusion_svg(const ConfusionMatrix& cm);

// Writes report.json, report.txt and confusion.svg into dir.
void write_report(const EvalReport& report, const std::string& dir);
EvalReport read_report_json(const std::string& path);

}  // namespace cola
