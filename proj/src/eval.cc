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

#include "argstruct/eval.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "argstruct/error.h"
#include "json.hpp"

namespace argstruct {

EvalScope EvalScope::For(Task task) {
  EvalScope scope;
  scope.task = task;
  scope.categories = {Category::kDep, Category::kZero};
  if (task == Task::kEnasa) scope.categories.push_back(Category::kBunsetsu);
  return scope;
}

bool EvalScope::Includes(Category category) const {
  return std::find(categories.begin(), categories.end(), category) != categories.end();
}

double Counts::precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }

double Counts::recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }

double Counts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Counts &Counts::operator+=(const Counts &other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

int CategoryColumn(Category category) {
  switch (category) {
    case Category::kDep:
      return 1;
    case Category::kZero:
      return 2;
    case Category::kBunsetsu:
      return 3;
    case Category::kInterZero:
      break;
  }
  throw Error("inter-sentential zero arguments have no score column");
}

int CaseColumn(CaseLabel label) {
  if (label == CaseLabel::kElse) throw Error("ELSE has no score column");
  return static_cast<int>(label) + 1;
}

const char *CategoryColumnName(int column) {
  static const char *names[] = {"ALL", "Dep", "Zero", "Bunsetsu"};
  return names[column];
}

const char *CaseColumnName(int column) {
  static const char *names[] = {"ALL", "NOM", "ACC", "DAT"};
  return names[column];
}

std::vector<int> ScoreReport::CategoryColumns() const {
  std::vector<int> columns = {kAllColumn};
  for (Category c : {Category::kDep, Category::kZero, Category::kBunsetsu}) {
    if (scope.Includes(c)) columns.push_back(CategoryColumn(c));
  }
  return columns;
}

namespace {

using InstanceKey = std::tuple<std::string, int, std::string>;

// Books one count into the four cells it contributes to. A negative
// category column books into the ALL category only.
void Book(ScoreReport &report, int category_column, CaseLabel label, int64_t Counts::*field) {
  const int case_column = CaseColumn(label);
  report.cells[kAllColumn][kAllColumn].*field += 1;
  report.cells[kAllColumn][case_column].*field += 1;
  if (category_column > 0) {
    report.cells[category_column][kAllColumn].*field += 1;
    report.cells[category_column][case_column].*field += 1;
  }
}

}  // namespace

ScoreReport Score(const Predictions &predictions, const Corpus &gold, const EvalScope &scope) {
  std::map<InstanceKey, const InstancePrediction *> by_key;
  for (const InstancePrediction &p : predictions) {
    InstanceKey key{p.doc_id, p.sentence_index, p.instance_id};
    if (!by_key.emplace(key, &p).second) {
      throw Error("duplicate prediction for instance " + p.instance_id + " in document " +
                  p.doc_id);
    }
  }
  ScoreReport report;
  report.scope = scope;
  size_t used = 0;
  for (const Document &doc : gold) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const Sentence &sentence = doc.sentences[s];
      for (const TargetInstance &instance : sentence.instances) {
        if (instance.task != scope.task) continue;
        auto it = by_key.find(InstanceKey{doc.id, static_cast<int>(s), instance.id});
        if (it == by_key.end()) {
          throw Error("no prediction for instance " + instance.id + " in document " + doc.id +
                      " sentence " + std::to_string(s));
        }
        ++used;
        const std::vector<CaseLabel> &labels = it->second->labels;
        if (static_cast<int>(labels.size()) != sentence.size()) {
          throw Error("prediction for instance " + instance.id + " has " +
                      std::to_string(labels.size()) + " labels for " +
                      std::to_string(sentence.size()) + " tokens");
        }
        std::vector<CaseLabel> gold_labels = GoldLabels(sentence, instance);
        for (int t = 0; t < sentence.size(); ++t) {
          const Category category = ClassifyArgumentCategory(sentence, instance, t);
          const bool in_scope = scope.Includes(category);
          const int column = in_scope ? CategoryColumn(category) : -1;
          const CaseLabel g = gold_labels[t];
          const CaseLabel p = labels[t];
          if (p != CaseLabel::kElse) {
            if (in_scope && p == g) {
              Book(report, column, p, &Counts::tp);
            } else {
              Book(report, column, p, &Counts::fp);
            }
          }
          if (g != CaseLabel::kElse && in_scope && p != g) Book(report, column, g, &Counts::fn);
        }
      }
    }
  }
  if (used != predictions.size()) {
    for (const InstancePrediction &p : predictions) {
      bool found = false;
      for (const Document &doc : gold) {
        if (doc.id != p.doc_id) continue;
        if (p.sentence_index < 0 || p.sentence_index >= static_cast<int>(doc.sentences.size())) {
          break;
        }
        for (const TargetInstance &instance : doc.sentences[p.sentence_index].instances) {
          if (instance.id == p.instance_id && instance.task == scope.task) found = true;
        }
      }
      if (!found) {
        throw Error("prediction for instance " + p.instance_id + " in document " + p.doc_id +
                    " sentence " + std::to_string(p.sentence_index) +
                    " matches no gold instance of task " + TaskName(scope.task));
      }
    }
  }
  return report;
}

Predictions PredictionsFromCorpus(const Corpus &corpus, std::optional<Task> task) {
  Predictions out;
  for (const Document &doc : corpus) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const Sentence &sentence = doc.sentences[s];
      for (const TargetInstance &instance : sentence.instances) {
        if (task && instance.task != *task) continue;
        InstancePrediction p;
        p.doc_id = doc.id;
        p.sentence_index = static_cast<int>(s);
        p.instance_id = instance.id;
        p.labels.assign(sentence.size(), CaseLabel::kElse);
        for (const Argument &a : instance.gold_args) p.labels[a.token] = a.label;
        for (const Argument &a : instance.demoted_args) p.labels[a.token] = a.label;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

Corpus ApplyPredictions(const Corpus &corpus, const Predictions &predictions) {
  std::map<InstanceKey, const InstancePrediction *> by_key;
  for (const InstancePrediction &p : predictions) {
    by_key[InstanceKey{p.doc_id, p.sentence_index, p.instance_id}] = &p;
  }
  Corpus out = corpus;
  for (Document &doc : out) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      Sentence &sentence = doc.sentences[s];
      for (TargetInstance &instance : sentence.instances) {
        instance.gold_args.clear();
        instance.demoted_args.clear();
        auto it = by_key.find(InstanceKey{doc.id, static_cast<int>(s), instance.id});
        if (it == by_key.end()) continue;
        const std::vector<CaseLabel> &labels = it->second->labels;
        if (static_cast<int>(labels.size()) != sentence.size()) {
          throw Error("prediction for instance " + instance.id + " has the wrong length");
        }
        for (int t = 0; t < sentence.size(); ++t) {
          if (labels[t] != CaseLabel::kElse) instance.gold_args.push_back(Argument{t, labels[t]});
        }
      }
    }
  }
  return out;
}

namespace {

std::string Percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string ColumnLabel(int category, int case_column) {
  if (category == kAllColumn && case_column == kAllColumn) return "ALL";
  return std::string(CategoryColumnName(category)) + ":" + CaseColumnName(case_column);
}

}  // namespace

std::string RenderText(const ScoreReport &report) {
  std::ostringstream out;
  out << "task " << TaskName(report.scope.task) << ", categories";
  for (Category c : report.scope.categories) out << ' ' << CategoryName(c);
  out << "\n\n";

  std::vector<std::pair<int, int>> columns = {{kAllColumn, kAllColumn}};
  for (int category : report.CategoryColumns()) {
    if (category == kAllColumn) continue;
    for (int c = 0; c < kNumCaseColumns; ++c) columns.emplace_back(category, c);
  }
  bool any_empty = false;
  std::ostringstream header, values;
  header << "      ";
  values << "F1    ";
  for (auto [category, case_column] : columns) {
    const Counts &cell = report.cell(category, case_column);
    std::string value = Percent(cell.f1());
    if (cell.empty()) {
      value += '*';
      any_empty = true;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %13s", ColumnLabel(category, case_column).c_str());
    header << buf;
    std::snprintf(buf, sizeof(buf), " %13s", value.c_str());
    values << buf;
  }
  out << header.str() << '\n' << values.str() << "\n\n";

  out << "cell                 TP       FP       FN        P        R       F1\n";
  for (int category : report.CategoryColumns()) {
    for (int c = 0; c < kNumCaseColumns; ++c) {
      const Counts &cell = report.cell(category, c);
      std::string label = ColumnLabel(category, c);
      if (cell.empty()) {
        label += '*';
        any_empty = true;
      }
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%-14s %8lld %8lld %8lld %8s %8s %8s\n", label.c_str(),
                    static_cast<long long>(cell.tp), static_cast<long long>(cell.fp),
                    static_cast<long long>(cell.fn), Percent(cell.precision()).c_str(),
                    Percent(cell.recall()).c_str(), Percent(cell.f1()).c_str());
      out << buf;
    }
  }
  if (any_empty) out << "\n* no gold or predicted arguments in this cell (all counts zero)\n";
  return out.str();
}

std::string RenderJson(const ScoreReport &report) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["task"] = TaskName(report.scope.task);
  nlohmann::ordered_json categories = nlohmann::ordered_json::array();
  for (Category c : report.scope.categories) categories.push_back(CategoryName(c));
  j["categories"] = categories;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (int category : report.CategoryColumns()) {
    for (int c = 0; c < kNumCaseColumns; ++c) {
      const Counts &cell = report.cell(category, c);
      cells.push_back({{"category", CategoryColumnName(category)},
                       {"case", CaseColumnName(c)},
                       {"tp", cell.tp},
                       {"fp", cell.fp},
                       {"fn", cell.fn},
                       {"precision", cell.precision()},
                       {"recall", cell.recall()},
                       {"f1", cell.f1()}});
    }
  }
  j["cells"] = cells;
  return j.dump(2) + "\n";
}

double CombinedF1(const std::vector<const ScoreReport *> &reports) {
  Counts total;
  for (const ScoreReport *r : reports) total += r->overall();
  return total.f1();
}

}  // namespace argstruct
