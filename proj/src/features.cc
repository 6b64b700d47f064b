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

#include "argstruct/features.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "argstruct/digest.h"
#include "argstruct/error.h"

namespace argstruct {

namespace {
constexpr const char *kUnkWord = "<UNK>";
constexpr const char *kPadWord = "<PAD>";
}  // namespace

Vocabulary::Vocabulary() {
  Add(kUnkWord, 0);
  Add(kPadWord, 0);
}

void Vocabulary::Add(const std::string &word, int64_t count) {
  ids_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
  counts_.push_back(count);
}

Vocabulary Vocabulary::Build(const Corpus &training, int min_count) {
  std::map<std::string, int64_t> counts;
  int64_t total = 0;
  for (const Document &doc : training) {
    for (const Sentence &sentence : doc.sentences) {
      for (const Token &token : sentence.tokens) {
        ++counts[token.surface];
        ++total;
      }
    }
  }
  if (total == 0) throw Error("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, int64_t>> entries(counts.begin(), counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  Vocabulary vocab;
  for (const auto &[word, count] : entries) {
    if (count < min_count) break;
    if (word == kUnkWord || word == kPadWord) continue;
    vocab.Add(word, count);
  }
  return vocab;
}

int Vocabulary::Lookup(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnk : it->second;
}

std::string Vocabulary::Serialize() const {
  std::ostringstream out;
  for (size_t i = 0; i < words_.size(); ++i) {
    out << i << '\t' << words_[i] << '\t' << counts_[i] << '\n';
  }
  return out.str();
}

Vocabulary Vocabulary::Parse(std::string_view text) {
  Vocabulary vocab;
  vocab.words_.clear();
  vocab.counts_.clear();
  vocab.ids_.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ParseError(line_no, "vocabulary line needs 3 fields");
    int id = 0;
    int64_t count = 0;
    try {
      id = std::stoi(line.substr(0, t1));
      count = std::stoll(line.substr(t2 + 1));
    } catch (const std::exception &) {
      throw ParseError(line_no, "bad vocabulary numbers");
    }
    if (id != vocab.size()) throw ParseError(line_no, "vocabulary ids must be dense");
    vocab.Add(line.substr(t1 + 1, t2 - t1 - 1), count);
  }
  if (vocab.size() < 2 || vocab.words_[kUnk] != kUnkWord || vocab.words_[kPad] != kPadWord) {
    throw ParseError(0, "vocabulary must start with the reserved <UNK> and <PAD> entries");
  }
  return vocab;
}

Vocabulary Vocabulary::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

void Vocabulary::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << Serialize();
}

uint64_t Vocabulary::Hash() const { return Fnv1a64(Serialize()); }

RelativePosition RelativePositions(const Sentence &sentence, int trigger_token, int t) {
  return {trigger_token - t, sentence.BunsetsuOf(trigger_token) - sentence.BunsetsuOf(t)};
}

int ClampPosition(int rel, int clamp) { return std::clamp(rel, -clamp, clamp); }

DepRelType DependencyRelation(const Sentence &sentence, const TargetInstance &instance, int t) {
  const int arg_chunk = sentence.BunsetsuOf(t);
  const int trigger_chunk = sentence.BunsetsuOf(instance.trigger_token);
  if (arg_chunk == trigger_chunk) {
    return instance.task == Task::kPasa ? DepRelType::kSameBunsetsuPred
                                        : DepRelType::kSameBunsetsuEvent;
  }
  if (sentence.bunsetsu[arg_chunk].head == trigger_chunk) return DepRelType::kArgHeadsToTrigger;
  if (sentence.bunsetsu[trigger_chunk].head == arg_chunk) return DepRelType::kTriggerHeadsToArg;
  return DepRelType::kNoDep;
}

std::array<float, 2> EventHoodVector(const Sentence &sentence, int t) {
  for (const TargetInstance &instance : sentence.instances) {
    if (instance.trigger_token == t && instance.task == Task::kPasa) return {0.0f, 1.0f};
  }
  for (const TargetInstance &instance : sentence.instances) {
    if (instance.trigger_token == t && instance.task == Task::kEnasa) return {1.0f, 0.0f};
  }
  return {0.0f, 0.0f};
}

FeatureBundle AssembleInput(const Sentence &sentence, const TargetInstance &instance,
                            const Vocabulary &vocab) {
  if (vocab.size() < 2) throw Error("vocabulary missing");
  const int trigger = instance.trigger_token;
  if (trigger < 0 || trigger >= sentence.size()) throw Error("trigger token out of range");
  const int trigger_word = vocab.Lookup(sentence.tokens[trigger].surface);
  const float task_flag = instance.task == Task::kPasa ? 1.0f : 0.0f;
  FeatureBundle bundle(sentence.tokens.size());
  for (int t = 0; t < sentence.size(); ++t) {
    TokenFeatures &f = bundle[t];
    f.candidate_word = vocab.Lookup(sentence.tokens[t].surface);
    f.trigger_word = trigger_word;
    RelativePosition rel = RelativePositions(sentence, trigger, t);
    f.word_rel = rel.word;
    f.bunsetsu_rel = rel.bunsetsu;
    f.dep = DependencyRelation(sentence, instance, t);
    f.event_hood = EventHoodVector(sentence, t);
    f.task_flag = task_flag;
  }
  return bundle;
}

}  // namespace argstruct
