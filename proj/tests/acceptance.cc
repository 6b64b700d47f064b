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

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance              run every criterion
//   acceptance 3 7          run only the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "argstruct/corpus.h"
#include "argstruct/eval.h"
#include "argstruct/features.h"
#include "argstruct/model.h"
#include "argstruct/synthgen.h"
#include "argstruct/train.h"
#include "argstruct/verify.h"
#include "gen_fuzz.h"
#include "json.hpp"
#include "test_util.h"

namespace argstruct {
namespace {

using nlohmann::json;
using testing::ReadFile;
using testing::RunCli;
using testing::SourcePath;
using testing::TempDir;

struct Outcome {
  bool passed = false;
  std::string detail;
};

class Clock {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Format(const char *format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

// Runs the CLI and throws with its output on a non-zero exit.
std::string MustRun(const std::string &args) {
  const testing::CommandResult r = RunCli(args);
  if (r.exit_code != 0) {
    throw std::runtime_error("`argstruct " + args + "` exited " + std::to_string(r.exit_code) +
                             ":\n" + r.output);
  }
  return r.output;
}

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void RandomizeAll(ag::ParameterStore<double> &params, std::mt19937_64 &rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (ag::Parameter<double> &p : params) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = u(rng);
  }
}

// 1. Whole-model gradient check of every variant.
Outcome GradientFidelity() {
  const Clock clock;
  const testing::CommandResult r = RunCli("gradcheck --tolerance 1e-4");
  const double seconds = clock.Seconds();
  std::set<std::string> variants;
  int checks = 0, failed = 0;
  double worst = 0.0;
  std::istringstream lines(r.output);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("variant ", 0) == 0) variants.insert(line.substr(8));
    const size_t at = line.find("max_rel_error=");
    if (at == std::string::npos) continue;
    ++checks;
    failed += line.rfind("ok", 0) != 0;
    worst = std::max(worst, std::stod(line.substr(at + 14)));
  }
  Outcome out;
  out.passed = r.exit_code == 0 && variants.size() == AllVariants().size() && failed == 0 &&
               worst <= 1e-4 && seconds < 120;
  out.detail = std::to_string(variants.size()) + " variants, " + std::to_string(checks) +
               " parameter checks, max relative error " + Format("%.2e", worst) + ", " +
               Format("%.1f s", seconds);
  if (!out.passed) out.detail += "\n" + r.output;
  return out;
}

// 2. AdaDelta on f(θ) = θ² from θ = 5.
Outcome OptimizerCorrectness() {
  ag::ParameterStore<double> params;
  ag::Parameter<double> &theta = params.Add("theta", 1, 1);
  theta.value(0, 0) = 5.0;
  AdaDelta<double> optimizer(params);
  double first_step = 0.0;
  int steps = 0;
  while (std::abs(params.Get("theta").value(0, 0)) >= 0.5 && steps < 2000) {
    ag::Parameter<double> &p = params.Get("theta");
    const double before = p.value(0, 0);
    p.grad(0, 0) = 2.0 * before;
    optimizer.Step(params);
    if (steps == 0) first_step = params.Get("theta").value(0, 0) - before;
    ++steps;
  }
  const double final_theta = params.Get("theta").value(0, 0);
  Outcome out;
  out.passed = std::abs(final_theta) < 0.5 && std::abs(first_step - (-0.004472)) <= 1e-6;
  out.detail = "first step " + Format("%.7f", first_step) + ", |θ| < 0.5 after " +
               std::to_string(steps) + " steps (θ = " + Format("%.4f", final_theta) + ")";
  return out;
}

// Fraction of tokens of every PASA instance in `corpus` whose decoded label
// equals the gold label.
double TokenAccuracy(Model<float> &model, const Corpus &corpus, const Vocabulary &vocab) {
  std::map<std::tuple<std::string, int, std::string>, std::vector<CaseLabel>> gold;
  for (const Document &doc : corpus) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      for (const TargetInstance &inst : doc.sentences[s].instances) {
        if (inst.task != Task::kPasa) continue;
        gold[{doc.id, static_cast<int>(s), inst.id}] = GoldLabels(doc.sentences[s], inst);
      }
    }
  }
  int64_t correct = 0, total = 0;
  for (const InstancePrediction &p :
       PredictCorpus({&model}, corpus, vocab, Task::kPasa, 1)) {
    const std::vector<CaseLabel> &g = gold.at({p.doc_id, p.sentence_index, p.instance_id});
    for (size_t t = 0; t < g.size(); ++t) correct += p.labels[t] == g[t];
    total += static_cast<int64_t>(g.size());
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

// 3. SINGLE with the full-size dimensions memorizes 20 training sentences.
Outcome Capacity() {
  const Clock clock;
  GenConfig g;
  g.seed = 3;
  g.train_pasa = 20;
  g.dev_pasa = 10;
  g.test_pasa = 1;
  g.enasa_ratio = 0.0;
  const std::vector<GeneratedSplit> splits = Generate(g);
  const Corpus train = Preprocess(splits[0].corpus, PreprocessOptions{});
  PreprocessOptions eval_options;
  eval_options.resolve_unique = true;
  const Corpus dev = Preprocess(splits[1].corpus, eval_options);
  TrainConfig config;
  config.model.variant = Variant::kSingle;
  config.model.dropout = 0.0;
  config.tasks = {Task::kPasa};
  config.epochs = 200;
  config.eval_threads = 1;
  const Vocabulary vocab = Vocabulary::Build(train, config.min_count);
  double accuracy = 0.0;
  int epoch = 0;
  config.on_epoch = [&](const EpochRecord &record, const Model<float> &model) {
    Model<float> copy = model;
    accuracy = TokenAccuracy(copy, train, vocab);
    epoch = record.epoch;
    return accuracy < 1.0;
  };
  Train(config, train, dev);
  const double seconds = clock.Seconds();
  Outcome out;
  out.passed = accuracy == 1.0 && epoch <= 200 && seconds < 600;
  out.detail = "d_w=300 d_h=300 L=4, " + std::to_string(CountInstances(train, Task::kPasa)) +
               " sentences, accuracy " + Format("%.4f", accuracy) + " at epoch " +
               std::to_string(epoch) + ", " + Format("%.1f s", seconds);
  return out;
}

// Trained runs shared by criteria 4 and 5.
struct TransferRuns {
  std::map<std::string, json> reports;  // label -> report.json
  std::string data_dir;
  std::string out_dir;
  double seconds = 0.0;
};

struct TransferSetting {
  std::string label;
  std::string args;
};

const std::vector<TransferSetting> &TransferSettings() {
  static const std::vector<TransferSetting> settings = {
      {"single/pasa", "--variant single --task pasa"},
      {"single/enasa", "--variant single --task enasa"},
      {"multi-input", "--variant multi-input"},
      {"multi-rnn", "--variant multi-rnn"},
      {"multi-output", "--variant multi-output"},
      {"multi-all", "--variant multi-all"},
  };
  return settings;
}

TransferRuns &Transfer(const TempDir &dir) {
  static TransferRuns runs;
  if (!runs.reports.empty()) return runs;
  const Clock clock;
  runs.data_dir = dir.file("transfer-data");
  runs.out_dir = dir.file("transfer");
  MustRun("gen-data --config " + SourcePath("configs/transfer-gen.conf") + " --out " +
          runs.data_dir);
  for (const TransferSetting &s : TransferSettings()) {
    std::string name = s.label;
    std::replace(name.begin(), name.end(), '/', '-');
    const std::string out = runs.out_dir + "/" + name;
    MustRun("train --config " + SourcePath("configs/transfer-train.conf") + " " + s.args +
            " --seeds 5 --save-epochs 0 --data " + runs.data_dir + " --out " + out);
    runs.reports[s.label] = json::parse(ReadFile(out + "/report.json"));
  }
  runs.seconds = clock.Seconds();
  return runs;
}

std::vector<double> TestF1(const json &report, const std::string &key) {
  std::vector<double> values;
  for (const json &run : report["runs"]) values.push_back(run["test_f1"][key].get<double>());
  return values;
}

// 4. Multi-task training helps on the starved-stem transfer benchmark.
Outcome TransferDirection(const TempDir &dir) {
  const TransferRuns &runs = Transfer(dir);
  const double single_pasa = Median(TestF1(runs.reports.at("single/pasa"), "PASA"));
  const double single_enasa = Median(TestF1(runs.reports.at("single/enasa"), "ENASA"));
  const double rnn_pasa = Median(TestF1(runs.reports.at("multi-rnn"), "PASA"));
  bool passed = rnn_pasa > single_pasa;
  std::string detail = "median PASA F1 multi-rnn " + Format("%.4f", rnn_pasa) + " vs single " +
                       Format("%.4f", single_pasa) + "; median ENASA F1 single " +
                       Format("%.4f", single_enasa);
  for (const char *variant : {"multi-input", "multi-rnn", "multi-output", "multi-all"}) {
    const double f1 = Median(TestF1(runs.reports.at(variant), "ENASA"));
    passed = passed && f1 > single_enasa;
    detail += std::string(", ") + variant + " " + Format("%.4f", f1);
  }
  passed = passed && runs.seconds < 1800;
  detail += "; " + Format("%.0f s", runs.seconds);
  return {passed, detail};
}

// 5. An ensemble of the five seeded multi-rnn models is at least as good as
// the median member.
Outcome EnsembleDirection(const TempDir &dir) {
  const TransferRuns &runs = Transfer(dir);
  const json &report = runs.reports.at("multi-rnn");
  std::string models;
  for (const json &run : report["runs"]) {
    if (!models.empty()) models += ",";
    models += run["dir"].get<std::string>() + "/best.model";
  }
  const std::string out = dir.file("ensemble.json");
  MustRun("eval --format json --ensemble " + models + " --data " + runs.data_dir +
          "/test.ntcl --out " + out);
  const double ensemble = json::parse(ReadFile(out))["combined_f1"].get<double>();
  const double median = Median(TestF1(report, "overall"));
  return {ensemble >= median, "overall F1 ensemble " + Format("%.4f", ensemble) +
                                  " vs median member " + Format("%.4f", median)};
}

// 6. Hand-counted scorer fixture and the Bunsetsu exclusion of the PASA scope.
Outcome ScorerExactness() {
  PreprocessOptions options;
  options.resolve_unique = true;
  const Corpus gold =
      Preprocess(ReadCorpusFile(SourcePath("fixtures/scorer/scope.gold.ntcl")), options);
  const Predictions pred = PredictionsFromCorpus(
      ReadCorpusFile(SourcePath("fixtures/scorer/scope.pred.ntcl")), Task::kPasa);
  const ScoreReport pasa = Score(pred, gold, EvalScope::For(Task::kPasa));
  EvalScope wide = EvalScope::For(Task::kEnasa);
  wide.task = Task::kPasa;
  const ScoreReport enasa = Score(pred, gold, wide);
  const int nom = CaseColumn(CaseLabel::kNom);
  const Counts &c = pasa.cell(kAllColumn, nom);
  const Counts &w = enasa.cell(kAllColumn, nom);
  const Counts &bunsetsu = enasa.cell(CategoryColumn(Category::kBunsetsu), nom);
  const bool hand_count = c.tp == 2 && c.fp == 1 && c.fn == 0 &&
                          c.precision() == 2.0 / 3.0 && c.recall() == 1.0 &&
                          std::abs(c.f1() - 0.8) <= 1e-12;
  // The Bunsetsu gold leaves the PASA denominator and the prediction on it
  // turns from TP into FP.
  const bool scope_switch = bunsetsu.tp == 1 && w.tp == c.tp + bunsetsu.tp &&
                            w.fp + bunsetsu.tp == c.fp && w.fn == c.fn && c.tp <= w.tp;
  std::ostringstream detail;
  detail << "PASA scope NOM TP=" << c.tp << " FP=" << c.fp << " FN=" << c.fn
         << " P=" << Format("%.4f", c.precision()) << " R=" << Format("%.4f", c.recall())
         << " F1=" << Format("%.4f", c.f1()) << "; ENASA categories NOM TP=" << w.tp
         << " FP=" << w.fp << " FN=" << w.fn;
  return {hand_count && scope_switch, detail.str()};
}

// metrics.jsonl with the wall-clock field of every record removed.
std::string MetricsWithoutTiming(const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::string line, out;
  while (std::getline(in, line)) {
    json record = json::parse(line);
    record.erase("seconds");
    out += record.dump() + "\n";
  }
  return out;
}

// 7. Identical config and seed give identical model files and logs.
Outcome Determinism(const TempDir &dir) {
  const std::string data = dir.file("determinism-data");
  MustRun("gen-data --config " + SourcePath("configs/transfer-gen.conf") +
          " --train-pasa 200 --dev-pasa 50 --test-pasa 50 --out " + data);
  const std::string common = "train --config " + SourcePath("configs/transfer-train.conf") +
                             " --variant multi-all --epochs 6 --seed 7 --data " + data;
  const std::string a = dir.file("determinism-a"), b = dir.file("determinism-b");
  MustRun(common + " --out " + a);
  MustRun(common + " --out " + b);
  int files = 0;
  bool identical = true;
  for (const auto &entry : std::filesystem::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".model" && name != "vocab.txt") continue;
    identical = identical && ReadFile(a + "/" + name) == ReadFile(b + "/" + name);
    ++files;
  }
  const bool logs = MetricsWithoutTiming(a + "/metrics.jsonl") ==
                    MetricsWithoutTiming(b + "/metrics.jsonl");
  return {identical && logs && files >= 8,
          std::to_string(files) + " model and vocabulary files " +
              (identical ? "bitwise identical" : "DIFFER") + ", metrics logs " +
              (logs ? "identical" : "DIFFER") + " apart from wall-clock seconds"};
}

// 8. Fixtures round-trip; fuzzed generator output parses and its declared
// categories agree with the classifier.
Outcome FormatRobustness() {
  int fixtures = 0, fixture_failures = 0;
  for (const auto &entry : std::filesystem::recursive_directory_iterator(SourcePath("fixtures"))) {
    const std::string path = entry.path().string();
    if (entry.path().extension() != ".ntcl" || path.find("/invalid/") != std::string::npos) {
      continue;
    }
    const std::string text = ReadFile(path);
    const std::string serialized = SerializeCorpus(ParseCorpusString(text));
    if (serialized != testing::Normalize(text) ||
        SerializeCorpus(ParseCorpusString(serialized)) != serialized) {
      ++fixture_failures;
      std::fprintf(stderr, "round-trip failed: %s\n", path.c_str());
    }
    ++fixtures;
  }
  std::mt19937_64 rng(2026);
  int configs = 0, parse_failures = 0, mismatches = 0;
  int64_t arguments = 0;
  for (int k = 0; k < 1000; ++k) {
    const GenConfig g = testing::RandomGenConfig(rng);
    ++configs;
    for (const GeneratedSplit &split : Generate(g)) {
      Corpus parsed;
      try {
        parsed = ParseCorpusString(SerializeCorpus(split.corpus));
      } catch (const std::exception &e) {
        ++parse_failures;
        std::fprintf(stderr, "config %d: %s\n", k, e.what());
        continue;
      }
      std::map<std::tuple<std::string, int, std::string>, std::pair<const Sentence *,
                                                                      const TargetInstance *>>
          index;
      for (const Document &doc : parsed) {
        for (size_t s = 0; s < doc.sentences.size(); ++s) {
          for (const TargetInstance &inst : doc.sentences[s].instances) {
            index[{doc.id, static_cast<int>(s), inst.id}] = {&doc.sentences[s], &inst};
          }
        }
      }
      for (const DeclaredArgument &d : split.declared) {
        ++arguments;
        const auto it = index.find({d.doc_id, d.sentence_index, d.instance_id});
        if (it == index.end() ||
            ClassifyArgumentCategory(*it->second.first, *it->second.second, d.token) !=
                d.category) {
          ++mismatches;
        }
      }
    }
  }
  std::ostringstream detail;
  detail << fixtures << " fixture files round-trip (" << fixture_failures << " failures); "
         << configs << " fuzzed configs, " << parse_failures << " parse failures, " << arguments
         << " declared arguments, " << mismatches << " category mismatches";
  return {fixtures > 0 && fixture_failures == 0 && parse_failures == 0 && mismatches == 0 &&
              arguments > 0,
          detail.str()};
}

// 9. Softmax rows sum to one and gates stay inside (0, 1) for random
// parameters, dimensions and variants.
Outcome DistributionInvariants() {
  GenConfig g;
  g.seed = 17;
  g.train_pasa = 40;
  g.dev_pasa = 1;
  g.test_pasa = 1;
  g.enasa_ratio = 0.5;
  const Corpus corpus = Preprocess(Generate(g)[0].corpus, PreprocessOptions{});
  const Vocabulary vocab = Vocabulary::Build(corpus, 1);
  const Task tasks[] = {Task::kPasa, Task::kEnasa};
  const std::vector<Example> examples = MakeExamples(corpus, vocab, tasks);
  std::vector<const Example *> by_task[2];
  for (const Example &ex : examples) by_task[ex.instance->task == Task::kEnasa].push_back(&ex);
  std::mt19937_64 rng(99);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double worst_sum = 0.0, min_gate = 1.0, max_gate = 0.0;
  int64_t rows = 0, gates = 0;
  bool gate_ok = true;
  for (int k = 0; k < 1000; ++k) {
    ModelConfig config;
    config.variant = AllVariants()[pick(0, 4)];
    config.vocab_size = vocab.size();
    config.word_dim = pick(1, 8);
    config.position_dim = pick(1, 4);
    config.dep_dim = pick(1, 4);
    config.hidden_dim = pick(1, 8);
    config.layers = pick(1, 3);
    config.task_word_dim = pick(1, 4);
    config.task_hidden_dim = pick(1, 8);
    config.task_layers = pick(1, 2);
    config.residual = pick(0, 1) == 1;
    config.position_clamp = pick(1, 64);
    Model<double> model(config, rng());
    RandomizeAll(model.params(), rng, std::uniform_real_distribution<double>(0.01, 3.0)(rng));
    const std::vector<const Example *> &pool = by_task[pick(0, 1)];
    std::vector<const Example *> members;
    for (int b = pick(1, 8); b > 0; --b) members.push_back(pool[pick(0, pool.size() - 1)]);
    const Batch batch = MakeBatch(members, config.position_clamp);
    ag::Tape<double> tape;
    const Model<double>::Output out = model.Forward(tape, batch, nullptr);
    const ag::Matrix<double> &probs = out.probs.value();
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      if (batch.mask[r] == 0.0f) continue;
      worst_sum = std::max(worst_sum, std::abs(probs.row(r).sum() - 1.0));
      gate_ok = gate_ok && probs.row(r).minCoeff() >= 0.0;
      ++rows;
    }
    if (UsesTaskOutput(config.variant)) {
      const ag::Matrix<double> &gate = out.gate.value();
      for (Eigen::Index r = 0; r < gate.rows(); ++r) {
        if (batch.mask[r] == 0.0f) continue;
        for (Eigen::Index c = 0; c < gate.cols(); ++c) {
          const double v = gate(r, c);
          gate_ok = gate_ok && v > 0.0 && v < 1.0;
          min_gate = std::min(min_gate, v);
          max_gate = std::max(max_gate, v);
          ++gates;
        }
      }
    }
  }
  std::ostringstream detail;
  detail << "1000 parameterizations, " << rows << " rows, max |sum - 1| = "
         << Format("%.2e", worst_sum) << ", " << gates << " gate values in ["
         << Format("%.2e", min_gate) << ", " << Format("%.6f", max_gate) << "]";
  return {worst_sum <= 1e-6 && gate_ok && gates > 0, detail.str()};
}

}  // namespace
}  // namespace argstruct

int main(int argc, char **argv) {
  using argstruct::Outcome;
  const argstruct::testing::TempDir dir("acceptance");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", argstruct::GradientFidelity},
      {"optimizer correctness", argstruct::OptimizerCorrectness},
      {"capacity", argstruct::Capacity},
      {"multi-task transfer direction", [&] { return argstruct::TransferDirection(dir); }},
      {"ensemble direction", [&] { return argstruct::EnsembleDirection(dir); }},
      {"scorer exactness", argstruct::ScorerExactness},
      {"determinism", [&] { return argstruct::Determinism(dir); }},
      {"format robustness", argstruct::FormatRobustness},
      {"distribution invariants", argstruct::DistributionInvariants},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    const int number = static_cast<int>(k) + 1;
    if (!selected.empty() && selected.count(number) == 0) continue;
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception &e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.passed;
    std::printf("criterion %d %s: %s  %s\n", number, criteria[k].first.c_str(),
                outcome.passed ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
