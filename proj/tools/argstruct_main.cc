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

// argstruct command-line entry point.
//
//   argstruct validate-corpus FILE...
//   argstruct gen-data --config FILE --out DIR
//   argstruct train --variant V --data DIR --out DIR [--seeds K]
//   argstruct eval --model M | --ensemble M1,M2,... | --predictions P --data FILE
//   argstruct predict --model M --data FILE --out FILE
//   argstruct gradcheck [--variant V] [--inject-fault OP]
//
// Every subcommand accepts `--config FILE` with flat `key = value` lines;
// keys are option names without the leading dashes, and explicit flags
// override file values. Exit status: 0 success, 1 runtime failure, 2 usage.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "argstruct/corpus.h"
#include "argstruct/digest.h"
#include "argstruct/error.h"
#include "argstruct/eval.h"
#include "argstruct/features.h"
#include "argstruct/gradcheck.h"
#include "argstruct/model.h"
#include "argstruct/synthgen.h"
#include "argstruct/train.h"
#include "argstruct/verify.h"
#include "json.hpp"

namespace argstruct {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string Trim(std::string s) {
  const char *space = " \t\r\n";
  s.erase(0, s.find_first_not_of(space));
  s.erase(s.find_last_not_of(space) + 1);
  return s;
}

// Turns `key = value` lines into `--key=value` arguments.
std::vector<std::string> ConfigArguments(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = Trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key = value");
    }
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

// Splices config-file arguments in front of the command-line ones so that
// later (explicit) values win.
std::vector<std::string> ExpandConfig(int argc, char **argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::vector<std::string> out;
  std::vector<std::string> injected;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      std::vector<std::string> more = ConfigArguments(args[++i]);
      injected.insert(injected.end(), more.begin(), more.end());
    } else if (args[i].rfind("--config=", 0) == 0) {
      std::vector<std::string> more = ConfigArguments(args[i].substr(9));
      injected.insert(injected.end(), more.begin(), more.end());
    } else {
      out.push_back(args[i]);
    }
  }
  if (!injected.empty()) {
    if (out.size() < 2) throw UsageError("--config must follow a subcommand");
    out.insert(out.begin() + 2, injected.begin(), injected.end());
  }
  return out;
}

Variant VariantFromName(const std::string &name) {
  std::optional<Variant> v = ParseVariant(name);
  if (!v) {
    std::string names;
    for (Variant x : AllVariants()) names += std::string(names.empty() ? "" : ", ") + VariantName(x);
    throw UsageError("unknown variant '" + name + "' (expected one of: " + names + ")");
  }
  return *v;
}

std::vector<Task> TasksFromName(const std::string &name) {
  if (name == "both") return {Task::kPasa, Task::kEnasa};
  if (name == "pasa" || name == "PASA") return {Task::kPasa};
  if (name == "enasa" || name == "ENASA") return {Task::kEnasa};
  throw UsageError("unknown task '" + name + "' (expected pasa, enasa or both)");
}

std::vector<std::string> SplitList(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Json ManifestBase(const char *command, const CLI::App &sub, const std::vector<std::string> &argv) {
  Json m;
  m["tool"] = "argstruct";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["argv"] = argv;
  m["resolved_options"] = sub.config_to_str(true, false);
  return m;
}

void WriteJson(const std::string &path, const Json &j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

Corpus LoadEvalCorpus(const std::string &path) {
  PreprocessOptions options;
  options.resolve_unique = true;
  return Preprocess(ReadCorpusFile(path), options);
}

Corpus LoadTrainCorpus(const std::string &path) {
  return Preprocess(ReadCorpusFile(path), PreprocessOptions{});
}

double Mean(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 runs.
double StdDev(const std::vector<double> &v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

// ---------------------------------------------------------------------------
// validate-corpus

struct ValidateArgs {
  std::vector<std::string> files;
  bool dump = false;
};

int RunValidate(const ValidateArgs &args) {
  int failures = 0;
  for (const std::string &path : args.files) {
    try {
      Corpus corpus = ReadCorpusFile(path);
      size_t sentences = 0;
      for (const Document &d : corpus) sentences += d.sentences.size();
      std::cout << path << ": ok, documents=" << corpus.size() << " sentences=" << sentences
                << " pasa=" << CountInstances(corpus, Task::kPasa)
                << " enasa=" << CountInstances(corpus, Task::kEnasa) << "\n";
      if (args.dump) std::cout << DumpCorpus(corpus);
    } catch (const ParseError &e) {
      std::cerr << path << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenArgs {
  GenConfig config;
  std::vector<double> case_rate{0.85, 0.7, 0.4};
  std::vector<double> pasa_pattern{0.7, 0.3};
  std::vector<double> enasa_pattern{0.35, 0.15, 0.5};
  std::string out;
};

template <size_t N>
std::array<double, N> FixedArray(const std::vector<double> &v, const char *name) {
  if (v.size() != N) {
    throw UsageError(std::string(name) + " needs " + std::to_string(N) + " comma-separated values");
  }
  std::array<double, N> a;
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

int RunGenData(GenArgs &args, const Json &manifest) {
  args.config.case_rate = FixedArray<3>(args.case_rate, "case-rate");
  args.config.pasa_pattern = FixedArray<2>(args.pasa_pattern, "pasa-pattern");
  args.config.enasa_pattern = FixedArray<3>(args.enasa_pattern, "enasa-pattern");
  std::vector<GeneratedSplit> splits = Generate(args.config);
  WriteGeneratedCorpus(args.config, splits, args.out, manifest.dump());
  for (const GeneratedSplit &s : splits) {
    std::cout << args.out << "/" << s.name << ".ntcl: pasa=" << CountInstances(s.corpus, Task::kPasa)
              << " enasa=" << CountInstances(s.corpus, Task::kEnasa) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string out;
  std::string variant = "multi-all";
  std::string task = "both";
  uint64_t seed = 1;
  int seeds = 1;
  TrainConfig config;
};

Json ReportJson(const std::vector<ScoreReport> &reports) {
  Json j;
  std::vector<const ScoreReport *> ptrs;
  for (const ScoreReport &r : reports) {
    j[TaskName(r.scope.task)] = r.overall().f1();
    ptrs.push_back(&r);
  }
  j["overall"] = CombinedF1(ptrs);
  return j;
}

int RunTrain(TrainArgs &args, Json manifest) {
  const Variant variant = VariantFromName(args.variant);
  const std::vector<Task> tasks = TasksFromName(args.task);
  if (variant == Variant::kSingle && tasks.size() != 1) {
    throw UsageError("the single variant is trained per task: pass --task pasa or --task enasa");
  }
  if (IsMultiTask(variant) && tasks.size() != 2) {
    throw UsageError(std::string("variant ") + VariantName(variant) +
                     " trains on both tasks: use --task both");
  }
  if (args.seeds < 1) throw UsageError("--seeds must be >= 1");
  auto resolve = [&](const std::string &explicit_path, const char *name) -> std::string {
    if (!explicit_path.empty()) return explicit_path;
    if (args.data.empty()) return "";
    return args.data + "/" + name;
  };
  const std::string train_path = resolve(args.train_path, "train.ntcl");
  const std::string dev_path = resolve(args.dev_path, "dev.ntcl");
  std::string test_path = resolve(args.test_path, "test.ntcl");
  if (train_path.empty() || dev_path.empty()) {
    throw UsageError("pass --data DIR or both --train and --dev");
  }
  if (args.test_path.empty() && !test_path.empty() && !fs::exists(test_path)) test_path.clear();

  const Corpus train = LoadTrainCorpus(train_path);
  const Corpus dev = LoadEvalCorpus(dev_path);
  std::optional<Corpus> test;
  if (!test_path.empty()) test = LoadEvalCorpus(test_path);

  fs::create_directories(args.out);
  Json inputs;
  inputs[train_path] = FileDigest(train_path);
  inputs[dev_path] = FileDigest(dev_path);
  if (test) inputs[test_path] = FileDigest(test_path);
  manifest["inputs"] = inputs;
  std::vector<uint64_t> seed_list;
  for (int k = 0; k < args.seeds; ++k) seed_list.push_back(args.seed + k);
  manifest["seeds"] = seed_list;

  Json runs = Json::array();
  std::vector<double> dev_scores;
  std::map<std::string, std::vector<double>> test_scores;
  for (uint64_t seed : seed_list) {
    TrainConfig config = args.config;
    config.model.variant = variant;
    config.tasks = tasks;
    config.seed = seed;
    config.out_dir = args.seeds > 1 ? args.out + "/seed" + std::to_string(seed) : args.out;
    TrainResult result = Train(config, train, dev);
    Json run;
    run["seed"] = seed;
    run["dir"] = config.out_dir;
    run["best_epoch"] = result.best_epoch;
    const double dev_f1 = result.log[result.best_epoch - 1].dev_f1_overall;
    run["dev_f1_overall"] = dev_f1;
    dev_scores.push_back(dev_f1);
    std::cout << "seed " << seed << ": best epoch " << result.best_epoch << ", dev F1 "
              << 100.0 * dev_f1;
    if (test) {
      std::vector<Model<float> *> members = {&result.best_model};
      std::vector<ScoreReport> reports =
          EvaluateCorpus(members, *test, result.vocab, tasks, config.eval_threads);
      Json t = ReportJson(reports);
      for (auto &[key, value] : t.items()) test_scores[key].push_back(value.get<double>());
      run["test_f1"] = t;
      std::cout << ", test F1 " << 100.0 * t["overall"].get<double>();
    }
    std::cout << "\n";
    runs.push_back(run);
  }
  manifest["runs"] = runs;
  WriteJson(args.out + "/manifest.json", manifest);

  if (args.seeds > 1) {
    Json report;
    report["variant"] = VariantName(variant);
    report["runs"] = runs;
    report["dev_f1_overall"] = {{"mean", Mean(dev_scores)}, {"sd", StdDev(dev_scores)}};
    Json test_summary;
    for (const auto &[key, values] : test_scores) {
      test_summary[key] = {{"mean", Mean(values)}, {"sd", StdDev(values)}};
    }
    if (test) report["test_f1"] = test_summary;
    WriteJson(args.out + "/report.json", report);
    std::ostringstream text;
    char buf[128];
    text << "variant " << VariantName(variant) << ", " << args.seeds << " runs\n";
    text << "seed        dev F1";
    if (test) text << "   test F1";
    text << "\n";
    for (const Json &run : runs) {
      std::snprintf(buf, sizeof(buf), "%-8llu %9.2f", static_cast<unsigned long long>(run["seed"].get<uint64_t>()),
                    100.0 * run["dev_f1_overall"].get<double>());
      text << buf;
      if (test) {
        std::snprintf(buf, sizeof(buf), " %9.2f", 100.0 * run["test_f1"]["overall"].get<double>());
        text << buf;
      }
      text << "\n";
    }
    std::snprintf(buf, sizeof(buf), "mean     %9.2f", 100.0 * Mean(dev_scores));
    text << buf;
    if (test) {
      std::snprintf(buf, sizeof(buf), " %9.2f", 100.0 * Mean(test_scores["overall"]));
      text << buf;
    }
    std::snprintf(buf, sizeof(buf), "\nSD       %9.2f", 100.0 * StdDev(dev_scores));
    text << buf;
    if (test) {
      std::snprintf(buf, sizeof(buf), " %9.2f", 100.0 * StdDev(test_scores["overall"]));
      text << buf;
    }
    text << "\n";
    std::ofstream(args.out + "/report.txt") << text.str();
    std::cout << text.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval / predict

struct InferArgs {
  std::string model;
  std::string ensemble;
  std::string predictions;
  std::string data;
  std::string vocab;
  std::string task;
  std::string format = "text";
  std::string out;
  std::string manifest;
  int threads = 0;
};

struct LoadedEnsemble {
  std::vector<LoadedModel> models;
  Vocabulary vocab;
  std::vector<std::string> paths;

  std::vector<Model<float> *> pointers() {
    std::vector<Model<float> *> out;
    for (LoadedModel &m : models) out.push_back(&m.model);
    return out;
  }
};

LoadedEnsemble LoadModels(const InferArgs &args) {
  LoadedEnsemble e;
  if (!args.model.empty() && !args.ensemble.empty()) {
    throw UsageError("pass either --model or --ensemble, not both");
  }
  e.paths = args.model.empty() ? SplitList(args.ensemble) : std::vector<std::string>{args.model};
  if (e.paths.empty()) throw UsageError("pass --model FILE or --ensemble FILE,FILE,...");
  const std::string vocab_path =
      args.vocab.empty() ? (fs::path(e.paths[0]).parent_path() / "vocab.txt").string() : args.vocab;
  e.vocab = Vocabulary::Load(vocab_path);
  const uint64_t hash = e.vocab.Hash();
  for (const std::string &path : e.paths) e.models.push_back(LoadModelFile(path, nullptr, &hash));
  return e;
}

std::vector<Task> InferTasks(const InferArgs &args, const LoadedEnsemble *models) {
  if (!args.task.empty()) return TasksFromName(args.task);
  if (models) return models->models[0].metadata.tasks;
  return {Task::kPasa, Task::kEnasa};
}

std::string RenderReports(const std::vector<ScoreReport> &reports, const std::string &format) {
  std::vector<const ScoreReport *> ptrs;
  for (const ScoreReport &r : reports) ptrs.push_back(&r);
  if (format == "json") {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    Json list = Json::array();
    for (const ScoreReport &r : reports) list.push_back(Json::parse(RenderJson(r)));
    j["reports"] = list;
    j["combined_f1"] = CombinedF1(ptrs);
    return j.dump(2) + "\n";
  }
  std::string text;
  for (const ScoreReport &r : reports) text += RenderText(r) + "\n";
  if (reports.size() > 1) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "combined overall F1 %.2f\n", 100.0 * CombinedF1(ptrs));
    text += buf;
  }
  return text;
}

int RunEval(const InferArgs &args, Json manifest) {
  if (args.format != "text" && args.format != "json") {
    throw UsageError("--format must be text or json");
  }
  if (args.data.empty()) throw UsageError("--data is required");
  const Corpus gold = LoadEvalCorpus(args.data);
  Json inputs;
  inputs[args.data] = FileDigest(args.data);
  std::vector<ScoreReport> reports;
  if (!args.predictions.empty()) {
    if (!args.model.empty() || !args.ensemble.empty()) {
      throw UsageError("--predictions cannot be combined with --model or --ensemble");
    }
    const Corpus predicted = ReadCorpusFile(args.predictions);
    inputs[args.predictions] = FileDigest(args.predictions);
    for (Task task : InferTasks(args, nullptr)) {
      reports.push_back(
          Score(PredictionsFromCorpus(predicted, task), gold, EvalScope::For(task)));
    }
  } else {
    LoadedEnsemble models = LoadModels(args);
    for (const std::string &p : models.paths) inputs[p] = FileDigest(p);
    reports = EvaluateCorpus(models.pointers(), gold, models.vocab, InferTasks(args, &models),
                             args.threads);
  }
  const std::string rendered = RenderReports(reports, args.format);
  if (args.out.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(args.out);
    if (!out) throw Error("cannot write '" + args.out + "'");
    out << rendered;
  }
  if (!args.manifest.empty()) {
    manifest["inputs"] = inputs;
    WriteJson(args.manifest, manifest);
  }
  return 0;
}

int RunPredict(const InferArgs &args, Json manifest) {
  if (args.data.empty() || args.out.empty()) throw UsageError("--data and --out are required");
  const Corpus raw = ReadCorpusFile(args.data);
  PreprocessOptions options;
  options.resolve_unique = true;
  const Corpus corpus = Preprocess(raw, options);
  LoadedEnsemble models = LoadModels(args);
  Predictions all;
  for (Task task : InferTasks(args, &models)) {
    Predictions p = PredictCorpus(models.pointers(), corpus, models.vocab, task, args.threads);
    all.insert(all.end(), p.begin(), p.end());
  }
  WriteCorpusFile(ApplyPredictions(raw, all), args.out);
  Json inputs;
  inputs[args.data] = FileDigest(args.data);
  for (const std::string &p : models.paths) inputs[p] = FileDigest(p);
  manifest["inputs"] = inputs;
  manifest["outputs"] = {{args.out, FileDigest(args.out)}};
  WriteJson(args.manifest.empty() ? args.out + ".manifest.json" : args.manifest, manifest);
  std::cout << args.out << ": " << all.size() << " instances predicted\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  std::string variant;
  std::string inject_fault;
  double tolerance = 1e-4;
  std::string manifest;
};

int RunGradcheck(const GradcheckArgs &args, Json manifest) {
  std::vector<Variant> variants = AllVariants();
  if (!args.variant.empty()) variants = {VariantFromName(args.variant)};
  if (!args.inject_fault.empty()) {
    const ag::GradientCheckReport ops = ag::CheckOps(args.tolerance);
    bool known = false;
    for (const ag::ParameterCheck &c : ops.checks) known = known || c.name == args.inject_fault;
    if (!known) throw UsageError("unknown op '" + args.inject_fault + "' for --inject-fault");
    ag::SetFaultInjection(args.inject_fault);
  }
  bool passed = true;
  std::vector<std::string> failures;
  Json results;
  const ag::GradientCheckReport ops = ag::CheckOps(args.tolerance);
  std::cout << "ops\n" << ops.ToString();
  results["ops"] = ops.passed();
  for (const std::string &name : ops.FailedNames()) failures.push_back("op " + name);
  passed = passed && ops.passed();
  for (Variant v : variants) {
    const ag::GradientCheckReport r = CheckModelGradients(v, args.tolerance);
    std::cout << "variant " << VariantName(v) << "\n" << r.ToString();
    results[VariantName(v)] = r.passed();
    for (const std::string &name : r.FailedNames()) {
      failures.push_back(std::string(VariantName(v)) + " " + name);
    }
    passed = passed && r.passed();
  }
  ag::SetFaultInjection("");
  if (passed) {
    std::cout << "gradcheck: PASS (tolerance " << args.tolerance << ")\n";
  } else {
    std::cout << "gradcheck: FAIL\n";
    if (!args.inject_fault.empty()) std::cout << "injected fault in op " << args.inject_fault << "\n";
    for (const std::string &f : failures) std::cout << "  failed: " << f << "\n";
  }
  if (!args.manifest.empty()) {
    manifest["results"] = results;
    WriteJson(args.manifest, manifest);
  }
  return passed ? 0 : 1;
}

// ---------------------------------------------------------------------------

void AddModelOptions(CLI::App *sub, TrainArgs &a) {
  ModelConfig &m = a.config.model;
  sub->add_option("--word-dim", m.word_dim, "word embedding size");
  sub->add_option("--position-dim", m.position_dim, "position embedding size");
  sub->add_option("--dep-dim", m.dep_dim, "dependency-type embedding size");
  sub->add_option("--hidden-dim", m.hidden_dim, "shared GRU state size");
  sub->add_option("--layers", m.layers, "shared GRU layers");
  sub->add_option("--task-word-dim", m.task_word_dim, "task-specific trigger embedding size");
  sub->add_option("--task-hidden-dim", m.task_hidden_dim, "task-specific GRU state size");
  sub->add_option("--task-layers", m.task_layers, "task-specific GRU layers");
  sub->add_option("--position-clamp", m.position_clamp, "relative positions are clamped to +-N");
  sub->add_option("--residual", m.residual, "residual connections from layer 2 on");
  sub->add_option("--dropout", m.dropout, "dropout rate on GRU layer inputs");
}

int Main(int argc, char **argv) {
  std::vector<std::string> args;
  try {
    args = ExpandConfig(argc, argv);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Predicate and event-noun argument structure analysis"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kToolVersion);
  auto add_config_note = [](CLI::App *sub) {
    sub->footer("--config FILE reads `key = value` defaults; explicit flags win.");
  };

  ValidateArgs validate;
  CLI::App *validate_cmd = app.add_subcommand("validate-corpus", "parse and validate corpus files");
  validate_cmd->add_option("files", validate.files, "corpus files")->required();
  validate_cmd->add_flag("--dump", validate.dump, "print the parsed structure");

  GenArgs gen;
  CLI::App *gen_cmd = app.add_subcommand("gen-data", "generate a synthetic corpus");
  {
    GenConfig &c = gen.config;
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    gen_cmd->add_option("--seed", c.seed);
    gen_cmd->add_option("--num-nouns", c.num_nouns);
    gen_cmd->add_option("--num-stems", c.num_stems);
    gen_cmd->add_option("--num-fillers", c.num_fillers);
    gen_cmd->add_option("--share-rate", c.share_rate, "fraction of stems used by both tasks");
    gen_cmd->add_option("--train-pasa", c.train_pasa, "PASA instances in train");
    gen_cmd->add_option("--dev-pasa", c.dev_pasa, "PASA instances in dev");
    gen_cmd->add_option("--test-pasa", c.test_pasa, "PASA instances in test");
    gen_cmd->add_option("--enasa-ratio", c.enasa_ratio, "ENASA:PASA instance ratio");
    gen_cmd->add_option("--case-rate", gen.case_rate, "NOM,ACC,DAT presence rates")->delimiter(',');
    gen_cmd->add_option("--pasa-pattern", gen.pasa_pattern, "PASA Dep,Zero rates")->delimiter(',');
    gen_cmd->add_option("--enasa-pattern", gen.enasa_pattern, "ENASA Dep,Zero,Bunsetsu rates")
        ->delimiter(',');
    gen_cmd->add_option("--attributive-rate", c.attributive_rate);
    gen_cmd->add_option("--max-distractors", c.max_distractors);
    gen_cmd->add_option("--min-tokens", c.min_tokens);
    gen_cmd->add_option("--max-tokens", c.max_tokens);
    gen_cmd->add_option("--sentences-per-doc", c.sentences_per_doc);
    gen_cmd->add_option("--starve-fraction", c.starve_fraction,
                        "fraction of shared stems made scarce in PASA training data");
    gen_cmd->add_option("--starve-weight", c.starve_weight,
                        "relative PASA training weight of starved stems");
    add_config_note(gen_cmd);
  }

  TrainArgs train;
  CLI::App *train_cmd = app.add_subcommand("train", "train a model");
  {
    TrainConfig &c = train.config;
    train_cmd->add_option("--data", train.data, "directory holding train/dev[/test].ntcl");
    train_cmd->add_option("--train", train.train_path, "training corpus");
    train_cmd->add_option("--dev", train.dev_path, "development corpus");
    train_cmd->add_option("--test", train.test_path, "test corpus scored after training");
    train_cmd->add_option("--out", train.out, "output directory")->required();
    train_cmd->add_option("--variant", train.variant,
                          "single, multi-input, multi-rnn, multi-output or multi-all");
    train_cmd->add_option("--task", train.task, "pasa, enasa or both");
    train_cmd->add_option("--seed", train.seed, "first seed");
    train_cmd->add_option("--seeds", train.seeds, "number of seeded runs");
    train_cmd->add_option("--epochs", c.epochs);
    train_cmd->add_option("--batch-size", c.batch_size);
    train_cmd->add_option("--clip", c.clip, "global gradient norm limit");
    train_cmd->add_option("--min-count", c.min_count, "words below this count map to UNK");
    train_cmd->add_option("--embeddings", c.pretrained_embeddings, "pretrained word vectors");
    train_cmd->add_option("--eval-threads", c.eval_threads, "dev evaluation threads");
    train_cmd->add_option("--save-epochs", c.save_epoch_checkpoints, "write epoch<N>.model files");
    AddModelOptions(train_cmd, train);
    add_config_note(train_cmd);
  }

  InferArgs eval;
  CLI::App *eval_cmd = app.add_subcommand("eval", "score a model, an ensemble or predictions");
  eval_cmd->add_option("--model", eval.model, "model file");
  eval_cmd->add_option("--ensemble", eval.ensemble, "comma-separated model files");
  eval_cmd->add_option("--predictions", eval.predictions, "corpus file holding predictions");
  eval_cmd->add_option("--data", eval.data, "gold corpus")->required();
  eval_cmd->add_option("--vocab", eval.vocab, "vocabulary (default: vocab.txt beside the model)");
  eval_cmd->add_option("--task", eval.task, "pasa, enasa or both (default: the model's tasks)");
  eval_cmd->add_option("--format", eval.format, "text or json");
  eval_cmd->add_option("--out", eval.out, "write the report here instead of stdout");
  eval_cmd->add_option("--manifest", eval.manifest, "write a run manifest");
  eval_cmd->add_option("--threads", eval.threads, "inference threads");
  add_config_note(eval_cmd);

  InferArgs predict;
  CLI::App *predict_cmd = app.add_subcommand("predict", "write predicted arguments");
  predict_cmd->add_option("--model", predict.model, "model file");
  predict_cmd->add_option("--ensemble", predict.ensemble, "comma-separated model files");
  predict_cmd->add_option("--data", predict.data, "input corpus")->required();
  predict_cmd->add_option("--out", predict.out, "output corpus")->required();
  predict_cmd->add_option("--vocab", predict.vocab, "vocabulary (default: vocab.txt beside the model)");
  predict_cmd->add_option("--task", predict.task, "pasa, enasa or both (default: the model's tasks)");
  predict_cmd->add_option("--manifest", predict.manifest, "manifest path (default: OUT.manifest.json)");
  predict_cmd->add_option("--threads", predict.threads, "inference threads");
  add_config_note(predict_cmd);

  GradcheckArgs gradcheck;
  CLI::App *gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck_cmd->add_option("--variant", gradcheck.variant, "check only this variant");
  gradcheck_cmd->add_option("--inject-fault", gradcheck.inject_fault,
                            "halve the backward pass of this op (test hook)");
  gradcheck_cmd->add_option("--tolerance", gradcheck.tolerance, "maximum relative error");
  gradcheck_cmd->add_option("--manifest", gradcheck.manifest, "write a run manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate_cmd) return RunValidate(validate);
    if (*gen_cmd) return RunGenData(gen, ManifestBase("gen-data", *gen_cmd, args));
    if (*train_cmd) return RunTrain(train, ManifestBase("train", *train_cmd, args));
    if (*eval_cmd) return RunEval(eval, ManifestBase("eval", *eval_cmd, args));
    if (*predict_cmd) return RunPredict(predict, ManifestBase("predict", *predict_cmd, args));
    if (*gradcheck_cmd) {
      return RunGradcheck(gradcheck, ManifestBase("gradcheck", *gradcheck_cmd, args));
    }
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace
}  // namespace argstruct

int main(int argc, char **argv) { return argstruct::Main(argc, argv); }
