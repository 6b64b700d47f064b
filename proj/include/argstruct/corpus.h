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

// Line-oriented corpus format for predicate / event-noun argument structure.
//
//   #DOC <doc_id>
//   #DEP <h0> <h1> ... <hK-1>          bunsetsu heads, -1 for ROOT
//   <tok_idx>\t<surface>\t<bunsetsu_idx>\t<marker>\t<args>
//   ...
//   <blank line ends the sentence>
//
// marker is `PRED:<iid>`, `EVENT:<iid>`, `VN` (verbal noun that a following
// light verb may merge into) or `_`. args is `_` or a `;`-separated list of
// `<CASE>=<iid>` entries, CASE in {NOM, ACC, DAT}. Argument links never cross
// sentence boundaries.

#ifndef ARGSTRUCT_CORPUS_H_
#define ARGSTRUCT_CORPUS_H_

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace argstruct {

enum class Task { kPasa = 0, kEnasa = 1 };

// Model output classes. kElse is never a corpus annotation.
enum class CaseLabel { kNom = 0, kAcc = 1, kDat = 2, kElse = 3 };
inline constexpr int kNumLabels = 4;
inline constexpr int kNumCases = 3;

enum class Category { kDep = 0, kZero = 1, kInterZero = 2, kBunsetsu = 3 };

enum class Marker { kNone, kPredicate, kEventNoun, kVerbalNoun };

inline constexpr int kRootHead = -1;

const char *TaskName(Task task);
const char *CaseName(CaseLabel label);
const char *CategoryName(Category category);
std::optional<CaseLabel> ParseCase(std::string_view name);
std::optional<Task> ParseTask(std::string_view name);

struct Token {
  int index = 0;
  std::string surface;
  int bunsetsu_index = 0;
  Marker marker = Marker::kNone;
  std::string marker_id;  // instance id for kPredicate / kEventNoun
};

struct Bunsetsu {
  int index = 0;
  int begin = 0;  // token span [begin, end)
  int end = 0;
  int head = kRootHead;
};

struct Argument {
  int token = 0;
  CaseLabel label = CaseLabel::kNom;
  bool operator==(const Argument &) const = default;
};

struct TargetInstance {
  std::string id;
  Task task = Task::kPasa;
  // Analysis position of the trigger word; moved by MergeSuru.
  int trigger_token = 0;
  // Token that carries the marker in the file.
  int marked_token = 0;
  std::vector<Argument> gold_args;
  // Duplicates removed by ResolveUniqueArguments. Their tokens score as ELSE.
  std::vector<Argument> demoted_args;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<Bunsetsu> bunsetsu;
  // In order of their marker tokens.
  std::vector<TargetInstance> instances;

  int size() const { return static_cast<int>(tokens.size()); }
  int BunsetsuOf(int token) const { return tokens.at(token).bunsetsu_index; }
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
};

using Corpus = std::vector<Document>;

// Parses and validates a corpus stream. Throws ParseError (with 1-based line)
// on syntax errors, dependency cycles, dangling or cross-sentence instance
// references, and duplicate token indices.
Corpus ParseCorpus(std::istream &input);
Corpus ParseCorpusString(std::string_view text);
Corpus ReadCorpusFile(const std::string &path);

// Writes the original annotation (markers where the file had them, demoted
// arguments included). Arguments on a token are ordered by instance order.
std::string SerializeCorpus(const Corpus &corpus);
void WriteCorpusFile(const Corpus &corpus, const std::string &path);

// Human-readable structural dump used by the fixture suite.
std::string DumpCorpus(const Corpus &corpus);

// Default light-verb surfaces for suru merging.
std::vector<std::string> DefaultLightVerbs();

// Moves PASA triggers from a light verb onto the immediately preceding
// same-bunsetsu token marked as a verbal noun.
Sentence MergeSuru(const Sentence &sentence,
                   const std::vector<std::string> &light_verbs);

// Keeps at most one gold argument per case. Priority: direct bunsetsu
// dependency with the trigger, then smallest word distance, then the left
// side of the trigger.
TargetInstance ResolveUniqueArguments(const Sentence &sentence,
                                      const TargetInstance &instance);

// Bunsetsu if in the trigger's chunk, Dep if either chunk heads to the
// other, else Zero. Throws Error if arg_token is out of range.
Category ClassifyArgumentCategory(const Sentence &sentence,
                                  const TargetInstance &instance,
                                  int arg_token);

// Per-token gold labels of an instance (ELSE outside gold_args).
std::vector<CaseLabel> GoldLabels(const Sentence &sentence,
                                  const TargetInstance &instance);

struct PreprocessOptions {
  std::vector<std::string> light_verbs = DefaultLightVerbs();
  bool resolve_unique = false;  // dev/test only
};

Corpus Preprocess(const Corpus &corpus, const PreprocessOptions &options);

// Number of instances of the given task.
int CountInstances(const Corpus &corpus, Task task);

}  // namespace argstruct

#endif  // ARGSTRUCT_CORPUS_H_
