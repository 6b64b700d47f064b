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

#include "argstruct/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <optional>
#include <span>
#include <sstream>

#include "argstruct/digest.h"
#include "argstruct/error.h"
#include "json.hpp"

namespace argstruct {

std::string HexDigest(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string FileDigest(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return HexDigest(Fnv1a64(buffer.str()));
}

namespace {

// Longest distractor-free sentence: three two-token argument chunks, the
// two-token predicate chunk, the attributive chunk and the filler.
constexpr int kLongestTemplate = 11;
constexpr const char *kLightVerb = "する";

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool IsDistribution(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

int CountOf(double fraction, int total) {
  return static_cast<int>(std::lround(fraction * total));
}

struct Frame {
  std::array<int, 3> particle;  // per case
  CaseLabel compound_case;
};

struct GenToken {
  std::string surface;
  Marker marker = Marker::kNone;
  bool trigger = false;
  bool argument = false;
  CaseLabel label = CaseLabel::kNom;
  Category category = Category::kDep;
};

struct GenChunk {
  std::vector<GenToken> tokens;
  int head = kRootHead;
};

class SentenceBuilder {
 public:
  SentenceBuilder(const GenConfig &config, std::mt19937_64 &rng) : config_(config), rng_(rng) {}

  double Uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  int Pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string Noun() { return "N" + std::to_string(Pick(config_.num_nouns)); }
  std::string Filler() { return "V" + std::to_string(Pick(config_.num_fillers)); }

  template <size_t N>
  int Sample(const std::array<double, N> &p) {
    const double u = Uniform();
    double acc = 0.0;
    for (size_t i = 0; i < N; ++i) {
      acc += p[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(N) - 1;
  }

  // Builds chunks for one instance on `stem`. Chunk order: pre-trigger
  // chunks shuffled, trigger chunk, optional attributive chunk, filler.
  std::vector<GenChunk> Build(Task task, const std::string &stem, const Frame &frame) {
    std::vector<GenChunk> before;
    GenChunk trigger_chunk;
    std::optional<GenChunk> attributive;
    std::vector<int> zero_chunks;  // indices into `before` heading to the filler
    std::vector<int> dep_chunks;
    GenToken compound;
    bool has_compound = false;

    for (int c = 0; c < kNumCases; ++c) {
      const CaseLabel label = static_cast<CaseLabel>(c);
      if (Uniform() >= config_.case_rate[c]) continue;
      GenToken noun{Noun(), Marker::kNone, false, true, label, Category::kDep};
      if (task == Task::kPasa) {
        if (label == CaseLabel::kNom && Uniform() < config_.attributive_rate) {
          attributive = GenChunk{{noun, GenToken{"P3"}}, kRootHead};
          continue;
        }
        noun.category = Sample(config_.pasa_pattern) == 0 ? Category::kDep : Category::kZero;
      } else if (label == frame.compound_case) {
        const int pattern = Sample(config_.enasa_pattern);
        noun.category = pattern == 0   ? Category::kDep
                        : pattern == 1 ? Category::kZero
                                       : Category::kBunsetsu;
      } else {
        const double dep = config_.enasa_pattern[0];
        const double zero = config_.enasa_pattern[1];
        noun.category = (dep + zero <= 0.0 || Uniform() * (dep + zero) < dep) ? Category::kDep
                                                                              : Category::kZero;
      }
      if (noun.category == Category::kBunsetsu) {
        compound = noun;
        has_compound = true;
        continue;
      }
      GenChunk chunk{{noun, GenToken{"P" + std::to_string(frame.particle[c])}}, kRootHead};
      (noun.category == Category::kDep ? dep_chunks : zero_chunks)
          .push_back(static_cast<int>(before.size()));
      before.push_back(std::move(chunk));
    }

    if (task == Task::kPasa) {
      trigger_chunk.tokens = {GenToken{stem, Marker::kVerbalNoun},
                              GenToken{kLightVerb, Marker::kPredicate, true}};
    } else {
      if (has_compound) trigger_chunk.tokens.push_back(compound);
      trigger_chunk.tokens.push_back(GenToken{stem, Marker::kEventNoun, true});
      trigger_chunk.tokens.push_back(GenToken{"Q"});
    }

    auto length = [&](int distractors) {
      int n = static_cast<int>(trigger_chunk.tokens.size()) + 1 + 2 * distractors;
      for (const GenChunk &c : before) n += static_cast<int>(c.tokens.size());
      if (attributive) n += 2;
      return n;
    };
    int distractors = Pick(config_.max_distractors + 1);
    while (length(distractors) > config_.max_tokens && distractors > 0) --distractors;
    while (length(distractors) < config_.min_tokens) ++distractors;
    std::vector<bool> distractor_to_trigger;
    for (int d = 0; d < distractors; ++d) {
      before.push_back(GenChunk{{GenToken{Noun()}, GenToken{"P3"}}, kRootHead});
      distractor_to_trigger.push_back(Uniform() < 0.5);
    }

    // Heads are assigned after shuffling, through a role tag per chunk.
    enum Role { kDepArg, kZeroArg, kDistractorToTrigger, kDistractorToFiller };
    std::vector<std::pair<GenChunk, Role>> tagged;
    for (size_t i = 0; i < before.size(); ++i) {
      Role role;
      if (std::find(dep_chunks.begin(), dep_chunks.end(), static_cast<int>(i)) != dep_chunks.end()) {
        role = kDepArg;
      } else if (std::find(zero_chunks.begin(), zero_chunks.end(), static_cast<int>(i)) !=
                 zero_chunks.end()) {
        role = kZeroArg;
      } else {
        const size_t d = i - dep_chunks.size() - zero_chunks.size();
        role = distractor_to_trigger[d] ? kDistractorToTrigger : kDistractorToFiller;
      }
      tagged.emplace_back(std::move(before[i]), role);
    }
    std::shuffle(tagged.begin(), tagged.end(), rng_);

    const int n_before = static_cast<int>(tagged.size());
    const int trigger_index = n_before;
    const int attributive_index = attributive ? n_before + 1 : -1;
    const int filler_index = n_before + (attributive ? 2 : 1);
    std::vector<GenChunk> chunks;
    for (auto &[chunk, role] : tagged) {
      chunk.head = (role == kDepArg || role == kDistractorToTrigger) ? trigger_index : filler_index;
      chunks.push_back(std::move(chunk));
    }
    trigger_chunk.head = attributive ? attributive_index : filler_index;
    chunks.push_back(std::move(trigger_chunk));
    if (attributive) {
      attributive->head = filler_index;
      chunks.push_back(std::move(*attributive));
    }
    chunks.push_back(GenChunk{{GenToken{Filler()}}, kRootHead});
    return chunks;
  }

 private:
  const GenConfig &config_;
  std::mt19937_64 &rng_;
};

// Flattens chunks into a sentence with a single instance `iid` and records
// the declared category of every argument.
Sentence Realize(const std::vector<GenChunk> &chunks, Task task, const std::string &iid,
                 std::vector<std::pair<Argument, Category>> &declared) {
  Sentence sentence;
  TargetInstance instance;
  instance.id = iid;
  instance.task = task;
  for (size_t b = 0; b < chunks.size(); ++b) {
    Bunsetsu chunk;
    chunk.index = static_cast<int>(b);
    chunk.begin = sentence.size();
    chunk.head = chunks[b].head;
    for (const GenToken &g : chunks[b].tokens) {
      Token token;
      token.index = sentence.size();
      token.surface = g.surface;
      token.bunsetsu_index = static_cast<int>(b);
      token.marker = g.marker;
      if (g.trigger) {
        token.marker_id = iid;
        instance.trigger_token = token.index;
        instance.marked_token = token.index;
      }
      if (g.argument) {
        instance.gold_args.push_back(Argument{token.index, g.label});
        declared.emplace_back(Argument{token.index, g.label}, g.category);
      }
      sentence.tokens.push_back(std::move(token));
    }
    chunk.end = sentence.size();
    sentence.bunsetsu.push_back(chunk);
  }
  sentence.instances.push_back(std::move(instance));
  return sentence;
}

}  // namespace

void GenConfig::Validate() const {
  auto fail = [](const std::string &msg) { throw ConfigError(msg); };
  if (num_nouns < 1) fail("num_nouns must be >= 1");
  if (num_stems < 2) fail("num_stems must be >= 2");
  if (num_fillers < 1) fail("num_fillers must be >= 1");
  if (share_rate < 0.0 || share_rate > 1.0) fail("share_rate must be in [0, 1]");
  if (train_pasa < 0 || dev_pasa < 0 || test_pasa < 0) fail("split sizes must be >= 0");
  if (enasa_ratio < 0.0 || !std::isfinite(enasa_ratio)) fail("enasa_ratio must be >= 0");
  for (double r : case_rate) {
    if (r < 0.0 || r > 1.0) fail("case_rate values must be in [0, 1]");
  }
  if (!IsDistribution(pasa_pattern)) fail("pasa_pattern must sum to 1");
  if (!IsDistribution(enasa_pattern)) fail("enasa_pattern must sum to 1");
  if (attributive_rate < 0.0 || attributive_rate > 1.0) fail("attributive_rate must be in [0, 1]");
  if (max_distractors < 0) fail("max_distractors must be >= 0");
  if (sentences_per_doc < 1) fail("sentences_per_doc must be >= 1");
  if (starve_fraction < 0.0 || starve_fraction > 1.0) fail("starve_fraction must be in [0, 1]");
  if (starve_weight < 0.0 || !std::isfinite(starve_weight)) fail("starve_weight must be >= 0");
  if (min_tokens < 1) fail("min_tokens must be >= 1");
  if (max_tokens < kLongestTemplate) {
    fail("infeasible length bounds: max_tokens=" + std::to_string(max_tokens) +
         " is below the longest argument pattern (" + std::to_string(kLongestTemplate) +
         " tokens)");
  }
  if (max_tokens - min_tokens < 1) {
    fail("infeasible length bounds: need max_tokens - min_tokens >= 1 so two-token " +
         std::string("distractor chunks can reach the range"));
  }
  const int shared = CountOf(share_rate, num_stems);
  const int rest = num_stems - shared;
  if (shared == 0 && (rest / 2 == 0 || rest - rest / 2 == 0)) {
    fail("each task needs at least one trigger stem");
  }
  if (starve_fraction > 0.0 && starve_weight == 0.0 && shared > 0 &&
      CountOf(starve_fraction, shared) == shared && rest / 2 == 0 && train_pasa > 0) {
    fail("starving every PASA stem leaves no PASA training stems");
  }
}

StemInventory MakeStemInventory(const GenConfig &config) {
  StemInventory inv;
  const int shared = CountOf(config.share_rate, config.num_stems);
  const int rest = config.num_stems - shared;
  const int pasa_only = rest / 2;
  int k = 0;
  for (int i = 0; i < shared; ++i) inv.shared.push_back("S" + std::to_string(k++));
  for (int i = 0; i < pasa_only; ++i) inv.pasa_only.push_back("S" + std::to_string(k++));
  while (k < config.num_stems) inv.enasa_only.push_back("S" + std::to_string(k++));
  const int starved = CountOf(config.starve_fraction, shared);
  inv.starved.assign(inv.shared.begin(), inv.shared.begin() + starved);
  return inv;
}

std::vector<GeneratedSplit> Generate(const GenConfig &config) {
  config.Validate();
  const StemInventory inv = MakeStemInventory(config);

  std::map<std::string, Frame> frames;
  std::mt19937_64 frame_rng(SplitMix64(config.seed ^ 0x66726D73ULL));
  for (int k = 0; k < config.num_stems; ++k) {
    Frame f;
    f.particle = {0, 1, 2};
    std::shuffle(f.particle.begin(), f.particle.end(), frame_rng);
    f.compound_case = std::uniform_int_distribution<int>(0, 1)(frame_rng) == 0 ? CaseLabel::kAcc
                                                                               : CaseLabel::kDat;
    frames["S" + std::to_string(k)] = f;
  }

  std::vector<std::string> pasa_stems = inv.shared;
  pasa_stems.insert(pasa_stems.end(), inv.pasa_only.begin(), inv.pasa_only.end());
  std::vector<std::string> enasa_stems = inv.shared;
  enasa_stems.insert(enasa_stems.end(), inv.enasa_only.begin(), inv.enasa_only.end());

  struct SplitSpec {
    const char *name;
    int pasa;
  };
  const SplitSpec specs[] = {
      {"train", config.train_pasa}, {"dev", config.dev_pasa}, {"test", config.test_pasa}};
  std::vector<GeneratedSplit> out;
  for (int s = 0; s < 3; ++s) {
    const SplitSpec &spec = specs[s];
    std::mt19937_64 rng(SplitMix64(config.seed * 3 + static_cast<uint64_t>(s) + 1));
    SentenceBuilder builder(config, rng);
    const bool starve = s == 0;
    std::vector<double> pasa_weights;
    for (const std::string &stem : pasa_stems) {
      const bool starved =
          starve && std::find(inv.starved.begin(), inv.starved.end(), stem) != inv.starved.end();
      pasa_weights.push_back(starved ? config.starve_weight : 1.0);
    }
    std::discrete_distribution<int> pick_pasa(pasa_weights.begin(), pasa_weights.end());

    const int n_pasa = spec.pasa;
    const int n_enasa = static_cast<int>(std::lround(config.enasa_ratio * n_pasa));
    std::vector<Task> order(n_pasa, Task::kPasa);
    order.insert(order.end(), n_enasa, Task::kEnasa);
    std::shuffle(order.begin(), order.end(), rng);

    GeneratedSplit split;
    split.name = spec.name;
    for (size_t i = 0; i < order.size(); ++i) {
      const size_t doc_index = i / config.sentences_per_doc;
      if (doc_index >= split.corpus.size()) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s-%04zu", spec.name, doc_index + 1);
        split.corpus.push_back(Document{id, {}});
      }
      Document &doc = split.corpus.back();
      const Task task = order[i];
      const std::string &stem = task == Task::kPasa
                                    ? pasa_stems[pick_pasa(rng)]
                                    : enasa_stems[builder.Pick(static_cast<int>(enasa_stems.size()))];
      const std::string iid =
          std::string(task == Task::kPasa ? "p" : "e") + std::to_string(doc.sentences.size() + 1);
      std::vector<std::pair<Argument, Category>> declared;
      doc.sentences.push_back(Realize(builder.Build(task, stem, frames.at(stem)), task, iid, declared));
      for (const auto &[arg, category] : declared) {
        split.declared.push_back(DeclaredArgument{doc.id,
                                                  static_cast<int>(doc.sentences.size()) - 1, iid,
                                                  arg.token, arg.label, category});
      }
    }
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<std::string> TriggerStems(const Corpus &corpus, Task task) {
  std::vector<std::string> stems;
  for (const Document &doc : corpus) {
    for (const Sentence &raw : doc.sentences) {
      const Sentence sentence = MergeSuru(raw, DefaultLightVerbs());
      for (const TargetInstance &instance : sentence.instances) {
        if (instance.task == task) stems.push_back(sentence.tokens[instance.trigger_token].surface);
      }
    }
  }
  std::sort(stems.begin(), stems.end());
  stems.erase(std::unique(stems.begin(), stems.end()), stems.end());
  return stems;
}

std::string GenConfigJson(const GenConfig &c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["num_nouns"] = c.num_nouns;
  j["num_stems"] = c.num_stems;
  j["num_fillers"] = c.num_fillers;
  j["share_rate"] = c.share_rate;
  j["train_pasa"] = c.train_pasa;
  j["dev_pasa"] = c.dev_pasa;
  j["test_pasa"] = c.test_pasa;
  j["enasa_ratio"] = c.enasa_ratio;
  j["case_rate"] = c.case_rate;
  j["pasa_pattern"] = c.pasa_pattern;
  j["enasa_pattern"] = c.enasa_pattern;
  j["attributive_rate"] = c.attributive_rate;
  j["max_distractors"] = c.max_distractors;
  j["min_tokens"] = c.min_tokens;
  j["max_tokens"] = c.max_tokens;
  j["sentences_per_doc"] = c.sentences_per_doc;
  j["starve_fraction"] = c.starve_fraction;
  j["starve_weight"] = c.starve_weight;
  return j.dump();
}

void WriteGeneratedCorpus(const GenConfig &config, const std::vector<GeneratedSplit> &splits,
                          const std::string &dir, const std::string &extra_manifest_json) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["tool"] = "argstruct";
  manifest["version"] = kToolVersion;
  manifest["command"] = "gen-data";
  manifest["seed"] = config.seed;
  manifest["config"] = nlohmann::ordered_json::parse(GenConfigJson(config));
  const StemInventory inv = MakeStemInventory(config);
  manifest["stems"] = {{"shared", inv.shared},
                       {"pasa_only", inv.pasa_only},
                       {"enasa_only", inv.enasa_only},
                       {"starved", inv.starved}};
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const GeneratedSplit &split : splits) {
    const std::string name = split.name + ".ntcl";
    WriteCorpusFile(split.corpus, dir + "/" + name);
    files[name] = {{"digest", FileDigest(dir + "/" + name)},
                   {"pasa_instances", CountInstances(split.corpus, Task::kPasa)},
                   {"enasa_instances", CountInstances(split.corpus, Task::kEnasa)}};
  }
  manifest["files"] = files;
  if (!extra_manifest_json.empty()) {
    manifest["run"] = nlohmann::ordered_json::parse(extra_manifest_json);
  }
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw Error("cannot write " + dir + "/manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace argstruct
