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

// Seeded synthetic corpora with controlled lexical overlap between
// predicates and event-nouns.
//
// Vocabulary: trigger stems S<k>, nouns N<k>, case particles P0..P2, the
// non-case particle P3, the event-noun particle Q, filler verbs V<k> and the
// light verb する. Every stem owns a case frame (a permutation mapping each
// case to one of P0..P2, shared by both tasks) and a compound case (ACC or
// DAT) that a same-bunsetsu noun takes in the event-noun use.
//
// A sentence realizes one instance and ends in a filler verb (the root):
//   PASA   [N P]* ... [S(VN) する(PRED)] ([N P3])? [V]
//   ENASA  [N P]* ... [(N) S(EVENT) Q] [V]
// Dep arguments head to the trigger chunk, Zero arguments head to the
// filler, a Bunsetsu argument is the noun compounded before the event-noun,
// and the optional PASA attributive argument is a NOM noun to the right of
// the predicate that the predicate heads to. [N P3] distractor chunks head
// to the filler.

#ifndef ARGSTRUCT_SYNTHGEN_H_
#define ARGSTRUCT_SYNTHGEN_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "argstruct/corpus.h"

namespace argstruct {

struct GenConfig {
  uint64_t seed = 1;
  int num_nouns = 60;
  int num_stems = 24;
  int num_fillers = 6;
  // Fraction of stems used by both tasks; the rest are split evenly between
  // PASA-only and ENASA-only stems.
  double share_rate = 0.5;
  // PASA instances per split; ENASA instances are round(ratio * PASA).
  int train_pasa = 600;
  int dev_pasa = 150;
  int test_pasa = 300;
  double enasa_ratio = 1.0 / 3.0;
  // Probability that an instance has a NOM / ACC / DAT argument.
  std::array<double, 3> case_rate{0.85, 0.7, 0.4};
  // Category distribution per argument: {Dep, Zero} for PASA and
  // {Dep, Zero, Bunsetsu} for ENASA. Bunsetsu only applies to a stem's
  // compound case; other cases renormalize over {Dep, Zero}.
  std::array<double, 2> pasa_pattern{0.7, 0.3};
  std::array<double, 3> enasa_pattern{0.35, 0.15, 0.5};
  double attributive_rate = 0.1;  // PASA NOM realized to the right
  int max_distractors = 2;
  int min_tokens = 3;
  int max_tokens = 24;
  int sentences_per_doc = 10;
  // Training-split PASA weight of the starved shared stems, relative to the
  // other stems, and the fraction of shared stems that are starved.
  double starve_fraction = 0.0;
  double starve_weight = 1.0;

  // Throws ConfigError on invalid values or when the longest sentence the
  // templates can produce does not fit max_tokens.
  void Validate() const;
};

struct DeclaredArgument {
  std::string doc_id;
  int sentence_index = 0;
  std::string instance_id;
  int token = 0;
  CaseLabel label = CaseLabel::kNom;
  Category category = Category::kDep;
};

struct GeneratedSplit {
  std::string name;  // train, dev or test
  Corpus corpus;
  std::vector<DeclaredArgument> declared;
};

struct StemInventory {
  std::vector<std::string> pasa_only;
  std::vector<std::string> enasa_only;
  std::vector<std::string> shared;
  std::vector<std::string> starved;  // subset of shared
};

StemInventory MakeStemInventory(const GenConfig &config);

// Train, dev and test splits, each generated from its own derived seed.
std::vector<GeneratedSplit> Generate(const GenConfig &config);

// Surface sets of trigger stems per task in a corpus (after no
// preprocessing: PASA stems are the VN tokens before a predicate marker).
std::vector<std::string> TriggerStems(const Corpus &corpus, Task task);

// Writes <dir>/{train,dev,test}.ntcl and <dir>/manifest.json.
void WriteGeneratedCorpus(const GenConfig &config, const std::vector<GeneratedSplit> &splits,
                          const std::string &dir, const std::string &extra_manifest_json = "");

std::string GenConfigJson(const GenConfig &config);

}  // namespace argstruct

#endif  // ARGSTRUCT_SYNTHGEN_H_
