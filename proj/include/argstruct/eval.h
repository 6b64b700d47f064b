/* Copyright 2026 The ArgStruct Authors. All Rights Reserved.

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

// Precision / recall / F1 of argument predictions, overall, per case and per
// argument category.
//
// Scoring rules for one instance and one predicted non-ELSE label on token t:
//   TP  gold has the same case on t and t's category is in scope.
//   FP  otherwise. The FP is booked under t's category when that category is
//       in scope, and in the ALL-category cells only when it is not.
// Every in-scope gold argument without a matching prediction is an FN.
// Category ALL and case ALL cells are micro sums.

#ifndef ARGSTRUCT_EVAL_H_
#define ARGSTRUCT_EVAL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "argstruct/corpus.h"

namespace argstruct {

struct EvalScope {
  Task task = Task::kPasa;
  std::vector<Category> categories;

  // PASA: Dep and Zero. ENASA: Dep, Zero and Bunsetsu.
  static EvalScope For(Task task);
  bool Includes(Category category) const;
};

struct Counts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  bool empty() const { return tp == 0 && fp == 0 && fn == 0; }
  Counts &operator+=(const Counts &other);
  bool operator==(const Counts &) const = default;
};

// Row and column indices of ScoreReport::cells.
inline constexpr int kAllColumn = 0;
inline constexpr int kNumCategoryColumns = 4;  // ALL, Dep, Zero, Bunsetsu
inline constexpr int kNumCaseColumns = 4;      // ALL, NOM, ACC, DAT

int CategoryColumn(Category category);
int CaseColumn(CaseLabel label);
const char *CategoryColumnName(int column);
const char *CaseColumnName(int column);

struct ScoreReport {
  EvalScope scope;
  std::array<std::array<Counts, kNumCaseColumns>, kNumCategoryColumns> cells{};

  const Counts &cell(int category_column, int case_column) const {
    return cells[category_column][case_column];
  }
  const Counts &overall() const { return cells[kAllColumn][kAllColumn]; }
  // Category columns shown for this scope, ALL first.
  std::vector<int> CategoryColumns() const;
};

struct InstancePrediction {
  std::string doc_id;
  int sentence_index = 0;
  std::string instance_id;
  std::vector<CaseLabel> labels;  // one per token
};

using Predictions = std::vector<InstancePrediction>;

// Scores predictions against the instances of scope.task in `gold`. Throws
// Error when an instance lacks a prediction, a prediction names no gold
// instance, or label counts differ from the sentence length.
ScoreReport Score(const Predictions &predictions, const Corpus &gold, const EvalScope &scope);

// Reads per-instance labels back from a corpus whose argument annotation
// holds predictions, optionally restricted to one task.
Predictions PredictionsFromCorpus(const Corpus &corpus,
                                  std::optional<Task> task = std::nullopt);

// Copy of `corpus` whose arguments are replaced by `predictions`. Instances
// without a prediction keep no arguments.
Corpus ApplyPredictions(const Corpus &corpus, const Predictions &predictions);

// Table text: an F1 row (ALL, then each category by case), then a
// TP/FP/FN/P/R/F1 block per cell. Cells with no counts are marked with `*`
// and footnoted.
std::string RenderText(const ScoreReport &report);

inline constexpr int kReportSchemaVersion = 1;
std::string RenderJson(const ScoreReport &report);

// Micro F1 over several reports (combined PASA + ENASA selection metric).
double CombinedF1(const std::vector<const ScoreReport *> &reports);

}  // namespace argstruct

#endif  // ARGSTRUCT_EVAL_H_
