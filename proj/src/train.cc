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

#include "argstruct/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "argstruct/error.h"
#include "argstruct/nn.h"
#include "json.hpp"

namespace argstruct {

template <typename Real>
AdaDelta<Real>::AdaDelta(const ag::ParameterStore<Real> &params, AdaDeltaOptions options)
    : options_(options) {
  for (const ag::Parameter<Real> &p : params) {
    mean_square_grad_.push_back(ag::Matrix<Real>::Zero(p.value.rows(), p.value.cols()));
    mean_square_delta_.push_back(ag::Matrix<Real>::Zero(p.value.rows(), p.value.cols()));
  }
}

template <typename Real>
void AdaDelta<Real>::Step(ag::ParameterStore<Real> &params) {
  if (params.size() != mean_square_grad_.size()) {
    throw ShapeError("optimizer state holds " + std::to_string(mean_square_grad_.size()) +
                     " tensors, store has " + std::to_string(params.size()));
  }
  const Real rho = static_cast<Real>(options_.rho);
  const Real eps = static_cast<Real>(options_.epsilon);
  size_t k = 0;
  for (ag::Parameter<Real> &p : params) {
    auto eg = mean_square_grad_[k].array();
    auto edx = mean_square_delta_[k].array();
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols() ||
        mean_square_grad_[k].rows() != p.value.rows() ||
        mean_square_grad_[k].cols() != p.value.cols()) {
      throw ShapeError("optimizer state does not match parameter '" + p.name + "'");
    }
    auto g = p.grad.array();
    eg = rho * eg + (1 - rho) * g.square();
    ag::Matrix<Real> delta = (-(edx + eps).sqrt() / (eg + eps).sqrt() * g).matrix();
    const bool bounded =
        ((delta.array().abs() <= ((edx + eps) / eps).sqrt() * Real(1.0001)) ||
         (delta.array().abs() <= Real(0)))
            .all();
    if (!bounded || !delta.allFinite()) {
      throw Error("AdaDelta update of '" + p.name + "' is non-finite or exceeds its scale bound");
    }
    edx = rho * edx + (1 - rho) * delta.array().square();
    p.value += delta;
    ++k;
  }
  ++steps_;
}

template <typename Real>
double GlobalGradNorm(const ag::ParameterStore<Real> &params) {
  double sum = 0.0;
  for (const ag::Parameter<Real> &p : params) {
    sum += p.grad.template cast<double>().squaredNorm();
  }
  return std::sqrt(sum);
}

template <typename Real>
double ClipGlobalNorm(ag::ParameterStore<Real> &params, double max_norm) {
  const double norm = GlobalGradNorm(params);
  if (norm > max_norm) {
    const Real scale = static_cast<Real>(max_norm / norm);
    for (ag::Parameter<Real> &p : params) p.grad *= scale;
  }
  return norm;
}

template class AdaDelta<float>;
template class AdaDelta<double>;
template double ClipGlobalNorm(ag::ParameterStore<float> &, double);
template double ClipGlobalNorm(ag::ParameterStore<double> &, double);
template double GlobalGradNorm(const ag::ParameterStore<float> &);
template double GlobalGradNorm(const ag::ParameterStore<double> &);

std::string EpochRecordJson(const EpochRecord &record) {
  nlohmann::ordered_json j;
  j["epoch"] = record.epoch;
  j["train_loss"] = record.train_loss;
  j["dev_f1_pasa"] = record.dev_f1_pasa ? nlohmann::ordered_json(*record.dev_f1_pasa) : nullptr;
  j["dev_f1_enasa"] = record.dev_f1_enasa ? nlohmann::ordered_json(*record.dev_f1_enasa) : nullptr;
  j["dev_f1_overall"] = record.dev_f1_overall;
  j["seconds"] = record.seconds;
  return j.dump();
}

template <typename Real>
ag::Var<Real> BatchLoss(Model<Real> &model, ag::Tape<Real> &tape, const Batch &batch,
                        std::mt19937_64 *dropout_rng) {
  typename Model<Real>::Output out = model.Forward(tape, batch, dropout_rng);
  std::vector<Real> mask(batch.mask.begin(), batch.mask.end());
  return ag::SoftmaxCrossEntropy<Real>(out.logits, batch.gold, mask);
}

template ag::Var<float> BatchLoss(Model<float> &, ag::Tape<float> &, const Batch &,
                                  std::mt19937_64 *);
template ag::Var<double> BatchLoss(Model<double> &, ag::Tape<double> &, const Batch &,
                                   std::mt19937_64 *);

std::vector<ag::Matrix<float>> EnsemblePredict(const std::vector<Model<float> *> &models,
                                               const Batch &batch) {
  if (models.empty()) throw Error("ensemble has no models");
  for (const Model<float> *m : models) {
    if (!(m->config() == models[0]->config())) {
      throw Error("ensemble members differ in variant or dimensions");
    }
  }
  std::vector<ag::Matrix<float>> sum = models[0]->Predict(batch);
  for (size_t k = 1; k < models.size(); ++k) {
    std::vector<ag::Matrix<float>> rows = models[k]->Predict(batch);
    for (size_t e = 0; e < sum.size(); ++e) sum[e] += rows[e];
  }
  if (models.size() > 1) {
    const float scale = 1.0f / static_cast<float>(models.size());
    for (ag::Matrix<float> &m : sum) m *= scale;
  }
  return sum;
}

std::vector<CaseLabel> DecodeInstance(const ag::Matrix<float> &probs, const Example &example) {
  std::vector<CaseLabel> labels = Decode(probs);
  labels.at(example.instance->trigger_token) = CaseLabel::kElse;
  labels.at(example.instance->marked_token) = CaseLabel::kElse;
  return labels;
}

int InferenceThreads(int requested) {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (requested > 0) threads = requested;
  if (const char *env = std::getenv("ARGSTRUCT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = std::min(threads, cap);
  }
  return threads;
}

Predictions PredictCorpus(const std::vector<Model<float> *> &models, const Corpus &corpus,
                          const Vocabulary &vocab, Task task, int threads, int batch_size) {
  const Task tasks[] = {task};
  std::vector<Example> examples = MakeExamples(corpus, vocab, tasks);
  const int clamp = models.empty() ? kDefaultPositionClamp : models[0]->config().position_clamp;
  const int num_batches = (static_cast<int>(examples.size()) + batch_size - 1) / batch_size;
  Predictions predictions(examples.size());
  auto work = [&](int worker, int workers) {
    for (int b = worker; b < num_batches; b += workers) {
      const int begin = b * batch_size;
      const int end = std::min<int>(begin + batch_size, static_cast<int>(examples.size()));
      std::vector<const Example *> members;
      for (int i = begin; i < end; ++i) members.push_back(&examples[i]);
      Batch batch = MakeBatch(members, clamp);
      std::vector<ag::Matrix<float>> probs = EnsemblePredict(models, batch);
      for (int i = begin; i < end; ++i) {
        InstancePrediction &p = predictions[i];
        p.doc_id = examples[i].doc_id;
        p.sentence_index = examples[i].sentence_index;
        p.instance_id = examples[i].instance->id;
        p.labels = DecodeInstance(probs[i - begin], examples[i]);
      }
    }
  };
  const int workers = std::max(1, std::min(InferenceThreads(threads), num_batches));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread &t : pool) t.join();
    for (std::exception_ptr &e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return predictions;
}

std::vector<ScoreReport> EvaluateCorpus(const std::vector<Model<float> *> &models,
                                        const Corpus &corpus, const Vocabulary &vocab,
                                        const std::vector<Task> &tasks, int threads) {
  std::vector<ScoreReport> reports;
  for (Task task : tasks) {
    Predictions predictions = PredictCorpus(models, corpus, vocab, task, threads);
    reports.push_back(Score(predictions, corpus, EvalScope::For(task)));
  }
  return reports;
}

namespace {

constexpr uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;
constexpr uint64_t kDropoutStream = 0xD1B54A32D192ED03ULL;

bool HasTask(const std::vector<Task> &tasks, Task task) {
  return std::find(tasks.begin(), tasks.end(), task) != tasks.end();
}

}  // namespace

TrainResult Train(const TrainConfig &config, const Corpus &train, const Corpus &dev) {
  if (config.tasks.empty()) throw ConfigError("no training task selected");
  if (IsMultiTask(config.model.variant) &&
      !(HasTask(config.tasks, Task::kPasa) && HasTask(config.tasks, Task::kEnasa))) {
    throw ConfigError(std::string("variant ") + VariantName(config.model.variant) +
                      " trains on both PASA and ENASA");
  }
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");

  Vocabulary vocab = Vocabulary::Build(train, config.min_count);
  ModelConfig model_config = config.model;
  model_config.vocab_size = vocab.size();
  Model<float> model(model_config, config.seed);
  if (!config.pretrained_embeddings.empty()) {
    nn::LoadPretrainedEmbeddings(config.pretrained_embeddings, vocab,
                                 model.params().Get("emb/word"));
  }

  std::vector<Example> examples = MakeExamples(train, vocab, config.tasks);
  std::vector<std::vector<const Example *>> by_task(2);
  for (const Example &ex : examples) by_task[static_cast<int>(ex.instance->task)].push_back(&ex);
  for (Task task : config.tasks) {
    if (by_task[static_cast<int>(task)].empty()) {
      throw Error(std::string("training corpus has no ") + TaskName(task) + " instances");
    }
  }

  ModelMetadata metadata{vocab.Hash(), config.seed, config.tasks};
  std::ofstream metrics;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    vocab.Save(config.out_dir + "/vocab.txt");
    metrics.open(config.out_dir + "/metrics.jsonl", std::ios::trunc);
    if (!metrics) throw Error("cannot write " + config.out_dir + "/metrics.jsonl");
  }

  AdaDelta<float> optimizer(model.params());
  std::mt19937_64 shuffle_rng(config.seed ^ kShuffleStream);
  std::mt19937_64 dropout_rng(config.seed ^ kDropoutStream);
  std::mt19937_64 *dropout = config.model.dropout > 0.0 ? &dropout_rng : nullptr;

  TrainResult result{model, vocab, 0, {}};
  double best_f1 = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::vector<const Example *>> batches;
    for (Task task : config.tasks) {
      std::vector<const Example *> pool = by_task[static_cast<int>(task)];
      std::shuffle(pool.begin(), pool.end(), shuffle_rng);
      for (size_t i = 0; i < pool.size(); i += config.batch_size) {
        const size_t end = std::min(pool.size(), i + config.batch_size);
        batches.emplace_back(pool.begin() + i, pool.begin() + end);
      }
    }
    std::shuffle(batches.begin(), batches.end(), shuffle_rng);

    double loss_sum = 0.0;
    double token_sum = 0.0;
    for (const std::vector<const Example *> &members : batches) {
      Batch batch = MakeBatch(members, model_config.position_clamp);
      ag::Tape<float> tape;
      ag::Var<float> loss = BatchLoss(model, tape, batch, dropout);
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        throw Error("non-finite training loss at epoch " + std::to_string(epoch) + " (batch of " +
                    std::to_string(batch.batch) + " " + TaskName(batch.task) +
                    " instances, first " + members[0]->doc_id + "/" +
                    members[0]->instance->id + ")");
      }
      double tokens = 0.0;
      for (float m : batch.mask) tokens += m;
      loss_sum += value * tokens;
      token_sum += tokens;
      model.params().ZeroGrad();
      tape.Backward(loss);
      ClipGlobalNorm(model.params(), config.clip);
      optimizer.Step(model.params());
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = token_sum > 0 ? loss_sum / token_sum : 0.0;
    std::vector<Model<float> *> members = {&model};
    std::vector<ScoreReport> reports =
        EvaluateCorpus(members, dev, vocab, config.tasks, config.eval_threads);
    std::vector<const ScoreReport *> report_ptrs;
    for (size_t k = 0; k < reports.size(); ++k) {
      report_ptrs.push_back(&reports[k]);
      const double f1 = reports[k].overall().f1();
      if (config.tasks[k] == Task::kPasa) record.dev_f1_pasa = f1;
      if (config.tasks[k] == Task::kEnasa) record.dev_f1_enasa = f1;
    }
    record.dev_f1_overall = CombinedF1(report_ptrs);
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(record);

    if (record.dev_f1_overall > best_f1) {
      best_f1 = record.dev_f1_overall;
      result.best_epoch = epoch;
      result.best_model = model;
    }
    if (!config.out_dir.empty()) {
      metrics << EpochRecordJson(record) << '\n';
      metrics.flush();
      if (config.save_epoch_checkpoints) {
        SaveModelFile(config.out_dir + "/epoch" + std::to_string(epoch) + ".model", model,
                      metadata);
      }
    }
    if (config.on_epoch && !config.on_epoch(record, model)) break;
  }
  if (!config.out_dir.empty()) {
    SaveModelFile(config.out_dir + "/best.model", result.best_model, metadata);
  }
  return result;
}

}  // namespace argstruct
