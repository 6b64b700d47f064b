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

#ifndef ARGSTRUCT_FEATURES_H_
#define ARGSTRUCT_FEATURES_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "argstruct/corpus.h"

namespace argstruct {

// Word ids with reserved UNK (0) and PAD (1). Remaining ids are ordered by
// descending training count, ties by byte-wise surface order.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kPad = 1;

  Vocabulary();

  // Counts every token surface of the corpus. Words with count < min_count
  // get no id. Throws Error on an empty corpus.
  static Vocabulary Build(const Corpus &training, int min_count = 2);

  // Text form: one `<id>\t<word>\t<count>` line per id.
  static Vocabulary Parse(std::string_view text);
  static Vocabulary Load(const std::string &path);
  std::string Serialize() const;
  void Save(const std::string &path) const;

  int Lookup(std::string_view word) const;
  int size() const { return static_cast<int>(words_.size()); }
  const std::string &word(int id) const { return words_.at(id); }
  int64_t count(int id) const { return counts_.at(id); }

  // FNV-1a 64 of Serialize().
  uint64_t Hash() const;

  bool operator==(const Vocabulary &other) const {
    return words_ == other.words_ && counts_ == other.counts_;
  }

 private:
  void Add(const std::string &word, int64_t count);

  std::vector<std::string> words_;
  std::vector<int64_t> counts_;
  std::unordered_map<std::string, int> ids_;
};

enum class DepRelType {
  kArgHeadsToTrigger = 0,
  kTriggerHeadsToArg = 1,
  kNoDep = 2,
  kSameBunsetsuPred = 3,
  kSameBunsetsuEvent = 4,
};
inline constexpr int kNumDepRelTypes = 5;

// Per-token encoding of one (sentence, instance) pair.
struct TokenFeatures {
  int candidate_word = Vocabulary::kPad;
  int trigger_word = Vocabulary::kPad;
  int word_rel = 0;      // idx(trigger) - idx(t), unclamped
  int bunsetsu_rel = 0;  // same on bunsetsu indices
  DepRelType dep = DepRelType::kNoDep;
  std::array<float, 2> event_hood{0.0f, 0.0f};
  float task_flag = 0.0f;  // 1 for PASA

  bool operator==(const TokenFeatures &) const = default;
};

using FeatureBundle = std::vector<TokenFeatures>;

inline constexpr int kDefaultPositionClamp = 64;

struct RelativePosition {
  int word = 0;
  int bunsetsu = 0;
};

RelativePosition RelativePositions(const Sentence &sentence, int trigger_token, int t);

int ClampPosition(int rel, int clamp);
// Row of a position embedding table with 2 * clamp + 1 rows.
inline int PositionRow(int rel, int clamp) { return ClampPosition(rel, clamp) + clamp; }

DepRelType DependencyRelation(const Sentence &sentence, const TargetInstance &instance, int t);

// [0,1] for a predicate trigger, [1,0] for an event-noun trigger, else [0,0].
std::array<float, 2> EventHoodVector(const Sentence &sentence, int t);

FeatureBundle AssembleInput(const Sentence &sentence, const TargetInstance &instance,
                            const Vocabulary &vocab);

// Width of the dense input vector: both words, both positions, dependency,
// event-hood and task flag.
inline int InputWidth(int word_dim, int position_dim, int dep_dim) {
  return 2 * word_dim + 2 * position_dim + dep_dim + 2 + 1;
}

}  // namespace argstruct

#endif  // ARGSTRUCT_FEATURES_H_
