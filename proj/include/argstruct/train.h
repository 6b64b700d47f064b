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

// AdaDelta, global-norm clipping, the epoch loop with dev-F1 model selection,
// corpus-level prediction and ensembling.

#ifndef ARGSTRUCT_TRAIN_H_
#define ARGSTRUCT_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "argstruct/autograd.h"
#include "argstruct/corpus.h"
#include "argstruct/eval.h"
#include "argstruct/features.h"
#include "argstruct/model.h"

namespace argstruct {

struct AdaDeltaOptions {
  double rho = 0.95;
  double epsilon = 1e-6;
};

// E[g²] <- ρE[g²] + (1-ρ)g²
// Δ     <- -sqrt(E[Δx²] + ε) / sqrt(E[g²] + ε) * g
// E[Δx²] <- ρE[Δx²] + (1-ρ)Δ²
// θ     <- θ + Δ
template <typename Real>
class AdaDelta {
 public:
  explicit AdaDelta(const ag::ParameterStore<Real> &params, AdaDeltaOptions options = {});

  // Applies one update using the gradients stored in `params`. Throws
  // ShapeError if `params` does not mirror the construction-time store and
  // Error if an update leaves the bound |Δ| <= sqrt((E[Δx²] + ε) / ε).
  void Step(ag::ParameterStore<Real> &params);

  const std::vector<ag::Matrix<Real>> &mean_square_grad() const { return mean_square_grad_; }
  const std::vector<ag::Matrix<Real>> &mean_square_delta() const { return mean_square_delta_; }
  int64_t steps() const { return steps_; }

 private:
  AdaDeltaOptions options_;
  std::vector<ag::Matrix<Real>> mean_square_grad_;
  std::vector<ag::Matrix<Real>> mean_square_delta_;
  int64_t steps_ = 0;
};

// Scales every gradient by max_norm / ‖g‖₂ when the global norm exceeds
// max_norm. Returns the norm before clipping.
template <typename Real>
double ClipGlobalNorm(ag::ParameterStore<Real> &params, double max_norm);

template <typename Real>
double GlobalGradNorm(const ag::ParameterStore<Real> &params);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> dev_f1_pasa;
  std::optional<double> dev_f1_enasa;
  double dev_f1_overall = 0.0;
  double seconds = 0.0;
};

// One JSON object per line, fixed key order.
std::string EpochRecordJson(const EpochRecord &record);

struct TrainConfig {
  ModelConfig model;  // vocab_size is filled in from the vocabulary
  int epochs = 20;
  int batch_size = 8;
  double clip = 4.0;
  uint64_t seed = 1;
  std::vector<Task> tasks = {Task::kPasa, Task::kEnasa};
  int min_count = 2;
  std::string pretrained_embeddings;  // optional `word v1 ... vd` file
  // Output directory for metrics.jsonl, epoch<N>.model, best.model and
  // vocab.txt. Nothing is written when empty.
  std::string out_dir;
  bool save_epoch_checkpoints = true;
  int eval_threads = 0;  // 0: ARGSTRUCT_THREADS or hardware concurrency
  // Called after every epoch; returning false ends training early.
  std::function<bool(const EpochRecord &, const Model<float> &)> on_epoch;
};

struct TrainResult {
  Model<float> best_model;
  Vocabulary vocab;
  int best_epoch = 0;
  std::vector<EpochRecord> log;
};

// `train` should have had suru merging applied; `dev` additionally unique
// argument resolution. Throws Error on an empty training set, a multi-task
// variant without both tasks, or a non-finite loss.
TrainResult Train(const TrainConfig &config, const Corpus &train, const Corpus &dev);

// Mean token cross-entropy of one batch, recorded on `tape`.
template <typename Real>
ag::Var<Real> BatchLoss(Model<Real> &model, ag::Tape<Real> &tape, const Batch &batch,
                        std::mt19937_64 *dropout_rng);

// Arithmetic mean of the models' probability rows per example. Throws Error
// if the models differ in configuration.
std::vector<ag::Matrix<float>> EnsemblePredict(const std::vector<Model<float> *> &models,
                                               const Batch &batch);

// Argmax labels with the trigger and marker tokens forced to ELSE, since a
// trigger is never its own argument.
std::vector<CaseLabel> DecodeInstance(const ag::Matrix<float> &probs, const Example &example);

// Threads used for inference: ARGSTRUCT_THREADS if set and positive,
// otherwise hardware concurrency, capped by `requested` when positive.
int InferenceThreads(int requested = 0);

// Predicts every instance of `task` in `corpus` with the (ensemble of)
// models.
Predictions PredictCorpus(const std::vector<Model<float> *> &models, const Corpus &corpus,
                          const Vocabulary &vocab, Task task, int threads = 0,
                          int batch_size = 32);

// Predict and score every task in `tasks`; returns one report per task.
std::vector<ScoreReport> EvaluateCorpus(const std::vector<Model<float> *> &models,
                                        const Corpus &corpus, const Vocabulary &vocab,
                                        const std::vector<Task> &tasks, int threads = 0);

}  // namespace argstruct

#endif  // ARGSTRUCT_TRAIN_H_
