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

// The five architecture variants and their shared input/output plumbing.
//
//   single        features -> shared GRU stack -> softmax(W_o h + b_o)
//   multi-input   + task-specific trigger embedding concatenated to each token
//   multi-rnn     + task-specific GRU stack on top of the shared one
//   multi-output  shared logits o, task logits o^task, gate g = σ(W_g h + b_g),
//                 probabilities softmax(g ⊙ o + (1 - g) ⊙ o^task)
//   multi-all     all three; gate and heads read the task stack's output
//
// The gated combination mixes logits, not probabilities: softmax is applied
// once, after gating.

#ifndef ARGSTRUCT_MODEL_H_
#define ARGSTRUCT_MODEL_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "argstruct/autograd.h"
#include "argstruct/corpus.h"
#include "argstruct/features.h"

namespace argstruct {

enum class Variant { kSingle, kMultiInput, kMultiRnn, kMultiOutput, kMultiAll };

const char *VariantName(Variant variant);
std::optional<Variant> ParseVariant(std::string_view name);
const std::vector<Variant> &AllVariants();

inline bool UsesTaskInput(Variant v) { return v == Variant::kMultiInput || v == Variant::kMultiAll; }
inline bool UsesTaskRnn(Variant v) { return v == Variant::kMultiRnn || v == Variant::kMultiAll; }
inline bool UsesTaskOutput(Variant v) {
  return v == Variant::kMultiOutput || v == Variant::kMultiAll;
}
inline bool IsMultiTask(Variant v) { return v != Variant::kSingle; }

struct ModelConfig {
  Variant variant = Variant::kSingle;
  int vocab_size = 2;
  int word_dim = 300;
  int position_dim = 16;
  int dep_dim = 16;
  int hidden_dim = 300;
  int layers = 4;
  int task_word_dim = 16;
  int task_hidden_dim = 300;
  int task_layers = 2;
  int position_clamp = kDefaultPositionClamp;
  bool residual = true;
  double dropout = 0.4;

  // Width of the per-token vector fed to the shared stack.
  int InputWidth() const;
  int FinalHiddenDim() const { return UsesTaskRnn(variant) ? task_hidden_dim : hidden_dim; }
  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

// One training/analysis unit: an instance with its features and (optional)
// gold labels.
struct Example {
  const Sentence *sentence = nullptr;
  const TargetInstance *instance = nullptr;
  FeatureBundle features;
  std::vector<CaseLabel> gold;
  std::string doc_id;
  int sentence_index = 0;
};

std::vector<Example> MakeExamples(const Corpus &corpus, const Vocabulary &vocab,
                                  std::span<const Task> tasks);

// Padded, time-major batch of examples of a single task. Row t * batch + b
// is token t of example b.
struct Batch {
  Task task = Task::kPasa;
  int steps = 0;
  int batch = 0;
  std::vector<int> lengths;
  std::vector<int> candidate_word;
  std::vector<int> trigger_word;
  std::vector<int> word_position;      // embedding rows
  std::vector<int> bunsetsu_position;  // embedding rows
  std::vector<int> dep;
  std::vector<float> flags;  // rows x 3: event-hood (2), task flag
  std::vector<int> gold;     // ELSE on padding
  std::vector<float> mask;   // 1 on real tokens

  int rows() const { return steps * batch; }
  bool padded() const;
};

// Throws Error if the examples mix tasks or the span is empty.
Batch MakeBatch(std::span<const Example *const> examples, int position_clamp);

template <typename Real>
class Model {
 public:
  struct Output {
    ag::Var<Real> logits;
    ag::Var<Real> probs;
    ag::Var<Real> gate;  // invalid unless the variant has a gated output
  };

  // Random initialization: embeddings uniform [-0.25, 0.25], weights
  // Glorot-uniform, biases zero.
  Model(const ModelConfig &config, uint64_t seed);
  // Adopts `params`; names and shapes must match `config` exactly.
  Model(const ModelConfig &config, ag::ParameterStore<Real> params);

  const ModelConfig &config() const { return config_; }
  ag::ParameterStore<Real> &params() { return params_; }
  const ag::ParameterStore<Real> &params() const { return params_; }

  // Dropout is active iff rng != nullptr.
  Output Forward(ag::Tape<Real> &tape, const Batch &batch, std::mt19937_64 *dropout_rng);

  // Per-example probability rows (length x 4), inference mode.
  std::vector<ag::Matrix<Real>> Predict(const Batch &batch);

  template <typename Other>
  Model<Other> Cast() const {
    return Model<Other>(config_, params_.template Cast<Other>());
  }

  // Names and shapes of every parameter the config requires, in order.
  static ag::ParameterStore<Real> Skeleton(const ModelConfig &config);

 private:
  ModelConfig config_;
  ag::ParameterStore<Real> params_;
};

// Argmax per row; ties go to the lowest label (NOM < ACC < DAT < ELSE).
template <typename Real>
std::vector<CaseLabel> Decode(const ag::Matrix<Real> &probs);

struct ModelMetadata {
  uint64_t vocab_hash = 0;
  uint64_t seed = 0;
  std::vector<Task> tasks;  // tasks the model was trained on
};

struct LoadedModel {
  Model<float> model;
  ModelMetadata metadata;
};

inline constexpr std::string_view kModelMagic = "ARGSTRUCT1";
inline constexpr uint32_t kModelFormatVersion = 1;

// Magic, format version, key=value metadata block, then named tensors as
// little-endian float32.
std::string SerializeModel(const Model<float> &model, const ModelMetadata &metadata);

// Throws ModelFormatError on truncation, bad magic/version, shape problems,
// or a mismatch with `expected` / `expected_vocab_hash` when given.
LoadedModel DeserializeModel(std::string_view bytes, const ModelConfig *expected = nullptr,
                             const uint64_t *expected_vocab_hash = nullptr);

void SaveModelFile(const std::string &path, const Model<float> &model,
                   const ModelMetadata &metadata);
LoadedModel LoadModelFile(const std::string &path, const ModelConfig *expected = nullptr,
                          const uint64_t *expected_vocab_hash = nullptr);

}  // namespace argstruct

#endif  // ARGSTRUCT_MODEL_H_
