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

#include "argstruct/model.h"

#include <algorithm>
#include <bit>
#include <limits>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "argstruct/error.h"
#include "argstruct/nn.h"

namespace argstruct {

const char *VariantName(Variant variant) {
  switch (variant) {
    case Variant::kSingle:
      return "single";
    case Variant::kMultiInput:
      return "multi-input";
    case Variant::kMultiRnn:
      return "multi-rnn";
    case Variant::kMultiOutput:
      return "multi-output";
    case Variant::kMultiAll:
      return "multi-all";
  }
  return "?";
}

std::optional<Variant> ParseVariant(std::string_view name) {
  for (Variant v : AllVariants()) {
    if (name == VariantName(v)) return v;
  }
  return std::nullopt;
}

const std::vector<Variant> &AllVariants() {
  static const std::vector<Variant> variants = {Variant::kSingle, Variant::kMultiInput,
                                                Variant::kMultiRnn, Variant::kMultiOutput,
                                                Variant::kMultiAll};
  return variants;
}

int ModelConfig::InputWidth() const {
  return argstruct::InputWidth(word_dim, position_dim, dep_dim) +
         (UsesTaskInput(variant) ? task_word_dim : 0);
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char *name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(vocab_size, "vocab_size");
  positive(word_dim, "word_dim");
  positive(position_dim, "position_dim");
  positive(dep_dim, "dep_dim");
  positive(hidden_dim, "hidden_dim");
  positive(layers, "layers");
  positive(position_clamp, "position_clamp");
  if (UsesTaskInput(variant)) positive(task_word_dim, "task_word_dim");
  if (UsesTaskRnn(variant)) {
    positive(task_hidden_dim, "task_hidden_dim");
    positive(task_layers, "task_layers");
  }
  if (vocab_size < 2) throw ConfigError("vocab_size must include UNK and PAD");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
}

std::vector<Example> MakeExamples(const Corpus &corpus, const Vocabulary &vocab,
                                  std::span<const Task> tasks) {
  std::vector<Example> examples;
  for (const Document &doc : corpus) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const Sentence &sentence = doc.sentences[s];
      for (const TargetInstance &instance : sentence.instances) {
        if (std::find(tasks.begin(), tasks.end(), instance.task) == tasks.end()) continue;
        Example ex;
        ex.sentence = &sentence;
        ex.instance = &instance;
        ex.features = AssembleInput(sentence, instance, vocab);
        ex.gold = GoldLabels(sentence, instance);
        ex.doc_id = doc.id;
        ex.sentence_index = static_cast<int>(s);
        examples.push_back(std::move(ex));
      }
    }
  }
  return examples;
}

bool Batch::padded() const {
  for (int len : lengths) {
    if (len != steps) return true;
  }
  return false;
}

Batch MakeBatch(std::span<const Example *const> examples, int position_clamp) {
  if (examples.empty()) throw Error("empty batch");
  Batch b;
  b.task = examples[0]->instance->task;
  b.batch = static_cast<int>(examples.size());
  for (const Example *ex : examples) {
    if (ex->instance->task != b.task) throw Error("batch mixes PASA and ENASA examples");
    b.lengths.push_back(static_cast<int>(ex->features.size()));
    b.steps = std::max(b.steps, b.lengths.back());
  }
  const int rows = b.rows();
  b.candidate_word.assign(rows, Vocabulary::kPad);
  b.trigger_word.resize(rows);
  b.word_position.assign(rows, PositionRow(0, position_clamp));
  b.bunsetsu_position.assign(rows, PositionRow(0, position_clamp));
  b.dep.assign(rows, static_cast<int>(DepRelType::kNoDep));
  b.flags.assign(static_cast<size_t>(rows) * 3, 0.0f);
  b.gold.assign(rows, static_cast<int>(CaseLabel::kElse));
  b.mask.assign(rows, 0.0f);
  const float task_flag = b.task == Task::kPasa ? 1.0f : 0.0f;
  for (int e = 0; e < b.batch; ++e) {
    const Example &ex = *examples[e];
    const int trigger_word = ex.features.empty() ? Vocabulary::kPad : ex.features[0].trigger_word;
    for (int t = 0; t < b.steps; ++t) {
      const int row = t * b.batch + e;
      b.trigger_word[row] = trigger_word;
      b.flags[row * 3 + 2] = task_flag;
      if (t >= b.lengths[e]) continue;
      const TokenFeatures &f = ex.features[t];
      b.candidate_word[row] = f.candidate_word;
      b.word_position[row] = PositionRow(f.word_rel, position_clamp);
      b.bunsetsu_position[row] = PositionRow(f.bunsetsu_rel, position_clamp);
      b.dep[row] = static_cast<int>(f.dep);
      b.flags[row * 3 + 0] = f.event_hood[0];
      b.flags[row * 3 + 1] = f.event_hood[1];
      b.flags[row * 3 + 2] = f.task_flag;
      b.mask[row] = 1.0f;
      if (!ex.gold.empty()) b.gold[row] = static_cast<int>(ex.gold[t]);
    }
  }
  return b;
}

namespace {

const char *TaskPrefix(Task task) { return task == Task::kPasa ? "pasa" : "enasa"; }

}  // namespace

template <typename Real>
ag::ParameterStore<Real> Model<Real>::Skeleton(const ModelConfig &config) {
  config.Validate();
  ag::ParameterStore<Real> p;
  const int positions = 2 * config.position_clamp + 1;
  p.Add("emb/word", config.vocab_size, config.word_dim);
  p.Add("emb/pos_word", positions, config.position_dim);
  p.Add("emb/pos_bunsetsu", positions, config.position_dim);
  p.Add("emb/dep", kNumDepRelTypes, config.dep_dim);
  if (UsesTaskInput(config.variant)) {
    p.Add("pasa/emb/trigger", config.vocab_size, config.task_word_dim);
    p.Add("enasa/emb/trigger", config.vocab_size, config.task_word_dim);
  }
  nn::AddStackParams(p, "shared", config.InputWidth(),
                     nn::StackConfig{config.layers, config.hidden_dim, config.residual, 0.0});
  if (UsesTaskRnn(config.variant)) {
    const nn::StackConfig task{config.task_layers, config.task_hidden_dim, config.residual, 0.0};
    nn::AddStackParams(p, "pasa/rnn", config.hidden_dim, task);
    nn::AddStackParams(p, "enasa/rnn", config.hidden_dim, task);
  }
  const int final_dim = config.FinalHiddenDim();
  p.Add("out/W", final_dim, kNumLabels);
  p.Add("out/b", 1, kNumLabels);
  if (UsesTaskOutput(config.variant)) {
    for (const char *prefix : {"pasa/out", "enasa/out", "gate"}) {
      p.Add(std::string(prefix) + "/W", final_dim, kNumLabels);
      p.Add(std::string(prefix) + "/b", 1, kNumLabels);
    }
  }
  return p;
}

template <typename Real>
Model<Real>::Model(const ModelConfig &config, uint64_t seed)
    : config_(config), params_(Skeleton(config)) {
  std::mt19937_64 rng(seed);
  auto ends_with = [](const std::string &s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  for (ag::Parameter<Real> &p : params_) {
    if (p.name.find("emb/") != std::string::npos) {
      nn::InitUniform(p, 0.25, rng);
    } else if (ends_with(p.name, "/b")) {
      p.value.setZero();
    } else if (ends_with(p.name, "/W") && p.name.find("/gru") != std::string::npos) {
      nn::InitGlorot(p, static_cast<int>(p.value.cols() / 3), rng);
    } else if (ends_with(p.name, "/U_zr")) {
      nn::InitGlorot(p, static_cast<int>(p.value.cols() / 2), rng);
    } else {
      nn::InitGlorot(p, 0, rng);
    }
  }
}

template <typename Real>
Model<Real>::Model(const ModelConfig &config, ag::ParameterStore<Real> params)
    : config_(config), params_(std::move(params)) {
  ag::ParameterStore<Real> skeleton = Skeleton(config);
  if (skeleton.size() != params_.size()) {
    throw ModelFormatError("parameter count " + std::to_string(params_.size()) +
                           " does not match the " + std::to_string(skeleton.size()) +
                           " required by the configuration");
  }
  auto it = params_.begin();
  for (const ag::Parameter<Real> &want : skeleton) {
    const ag::Parameter<Real> &have = *it++;
    if (have.name != want.name) {
      throw ModelFormatError("expected parameter '" + want.name + "', found '" + have.name + "'");
    }
    if (have.value.rows() != want.value.rows() || have.value.cols() != want.value.cols()) {
      throw ModelFormatError("parameter '" + want.name + "' has shape " +
                             std::to_string(have.value.rows()) + "x" +
                             std::to_string(have.value.cols()) + ", expected " +
                             std::to_string(want.value.rows()) + "x" +
                             std::to_string(want.value.cols()));
    }
  }
  for (ag::Parameter<Real> &p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

template <typename Real>
typename Model<Real>::Output Model<Real>::Forward(ag::Tape<Real> &tape, const Batch &batch,
                                                  std::mt19937_64 *dropout_rng) {
  using ag::Var;
  const int rows = batch.rows();
  const int steps = batch.steps;
  const int width = batch.batch;
  auto param = [&](const std::string &name) { return tape.Param(params_.Get(name)); };

  Var<Real> word_table = param("emb/word");
  ag::Matrix<Real> flags(rows, 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < 3; ++c) flags(r, c) = static_cast<Real>(batch.flags[r * 3 + c]);
  }
  std::vector<Var<Real>> parts = {
      ag::Gather<Real>(word_table, batch.candidate_word),
      ag::Gather<Real>(word_table, batch.trigger_word),
      ag::Gather<Real>(param("emb/pos_word"), batch.word_position),
      ag::Gather<Real>(param("emb/pos_bunsetsu"), batch.bunsetsu_position),
      ag::Gather<Real>(param("emb/dep"), batch.dep),
      tape.Constant(std::move(flags)),
  };
  const std::string task = TaskPrefix(batch.task);
  if (UsesTaskInput(config_.variant)) {
    parts.push_back(ag::Gather<Real>(param(task + "/emb/trigger"), batch.trigger_word));
  }
  Var<Real> inputs = ag::ConcatCols<Real>(parts);

  auto make_masks = [&](int dim) {
    std::vector<Var<Real>> masks;
    if (!batch.padded()) return masks;
    for (int t = 0; t < steps; ++t) {
      ag::Matrix<Real> m(width, dim);
      for (int b = 0; b < width; ++b) m.row(b).setConstant(static_cast<Real>(batch.mask[t * width + b]));
      masks.push_back(tape.Constant(std::move(m)));
    }
    return masks;
  };

  const nn::StackConfig shared{config_.layers, config_.hidden_dim, config_.residual,
                               config_.dropout};
  Var<Real> hidden = nn::StackedBiGru(tape, params_, "shared", inputs, steps, width, shared,
                                      make_masks(config_.hidden_dim), dropout_rng);
  if (UsesTaskRnn(config_.variant)) {
    const nn::StackConfig stack{config_.task_layers, config_.task_hidden_dim, config_.residual,
                                config_.dropout};
    hidden = nn::StackedBiGru(tape, params_, task + "/rnn", hidden, steps, width, stack,
                              make_masks(config_.task_hidden_dim), dropout_rng);
  }

  Output out;
  Var<Real> shared_logits = nn::OutputHead(param("out/W"), param("out/b"), hidden);
  if (UsesTaskOutput(config_.variant)) {
    Var<Real> task_logits = nn::OutputHead(param(task + "/out/W"), param(task + "/out/b"), hidden);
    out.gate = ag::Sigmoid(nn::OutputHead(param("gate/W"), param("gate/b"), hidden));
    // g * o + (1 - g) * o_task
    out.logits = ag::Add(task_logits, ag::Mul(out.gate, ag::Sub(shared_logits, task_logits)));
  } else {
    out.logits = shared_logits;
  }
  out.probs = ag::Softmax(out.logits);
  return out;
}

template <typename Real>
std::vector<ag::Matrix<Real>> Model<Real>::Predict(const Batch &batch) {
  ag::Tape<Real> tape;
  Output out = Forward(tape, batch, nullptr);
  const ag::Matrix<Real> &probs = out.probs.value();
  std::vector<ag::Matrix<Real>> result;
  for (int b = 0; b < batch.batch; ++b) {
    ag::Matrix<Real> rows(batch.lengths[b], kNumLabels);
    for (int t = 0; t < batch.lengths[b]; ++t) rows.row(t) = probs.row(t * batch.batch + b);
    result.push_back(std::move(rows));
  }
  return result;
}

template <typename Real>
std::vector<CaseLabel> Decode(const ag::Matrix<Real> &probs) {
  std::vector<CaseLabel> labels(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    int best = 0;
    for (int c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, best)) best = c;
    }
    labels[r] = static_cast<CaseLabel>(best);
  }
  return labels;
}

template class Model<float>;
template class Model<double>;
template std::vector<CaseLabel> Decode(const ag::Matrix<float> &);
template std::vector<CaseLabel> Decode(const ag::Matrix<double> &);

// ---------------------------------------------------------------------------
// Model file.

namespace {

void PutU32(std::string &out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view Take(size_t n, const char *what) {
    if (bytes_.size() - pos_ < n) {
      throw ModelFormatError(std::string("truncated model file while reading ") + what);
    }
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  uint32_t U32(const char *what) {
    std::string_view b = Take(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

std::string TasksString(const std::vector<Task> &tasks) {
  std::string s;
  for (Task t : tasks) {
    if (!s.empty()) s += ',';
    s += TaskName(t);
  }
  return s;
}

std::string MetadataText(const ModelConfig &c, const ModelMetadata &m) {
  std::ostringstream out;
  out << "variant=" << VariantName(c.variant) << '\n'
      << "vocab_size=" << c.vocab_size << '\n'
      << "word_dim=" << c.word_dim << '\n'
      << "position_dim=" << c.position_dim << '\n'
      << "dep_dim=" << c.dep_dim << '\n'
      << "hidden_dim=" << c.hidden_dim << '\n'
      << "layers=" << c.layers << '\n'
      << "task_word_dim=" << c.task_word_dim << '\n'
      << "task_hidden_dim=" << c.task_hidden_dim << '\n'
      << "task_layers=" << c.task_layers << '\n'
      << "position_clamp=" << c.position_clamp << '\n'
      << "residual=" << (c.residual ? 1 : 0) << '\n'
      << "dropout=" << c.dropout << '\n'
      << "vocab_hash=" << std::hex << m.vocab_hash << std::dec << '\n'
      << "seed=" << m.seed << '\n'
      << "tasks=" << TasksString(m.tasks) << '\n';
  return out.str();
}

void ParseMetadata(std::string_view text, ModelConfig &c, ModelMetadata &m) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ModelFormatError("bad metadata line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char *key) -> const std::string & {
    auto it = kv.find(key);
    if (it == kv.end()) throw ModelFormatError(std::string("metadata lacks '") + key + "'");
    return it->second;
  };
  auto get_int = [&](const char *key) {
    try {
      return std::stoi(get(key));
    } catch (const std::logic_error &) {
      throw ModelFormatError(std::string("bad metadata value for '") + key + "'");
    }
  };
  std::optional<Variant> variant = ParseVariant(get("variant"));
  if (!variant) throw ModelFormatError("unknown variant '" + get("variant") + "'");
  c.variant = *variant;
  c.vocab_size = get_int("vocab_size");
  c.word_dim = get_int("word_dim");
  c.position_dim = get_int("position_dim");
  c.dep_dim = get_int("dep_dim");
  c.hidden_dim = get_int("hidden_dim");
  c.layers = get_int("layers");
  c.task_word_dim = get_int("task_word_dim");
  c.task_hidden_dim = get_int("task_hidden_dim");
  c.task_layers = get_int("task_layers");
  c.position_clamp = get_int("position_clamp");
  c.residual = get_int("residual") != 0;
  try {
    c.dropout = std::stod(get("dropout"));
    m.vocab_hash = std::stoull(get("vocab_hash"), nullptr, 16);
    m.seed = std::stoull(get("seed"));
  } catch (const std::logic_error &) {
    throw ModelFormatError("bad numeric metadata");
  }
  m.tasks.clear();
  std::string tasks = get("tasks");
  std::istringstream ts(tasks);
  std::string item;
  while (std::getline(ts, item, ',')) {
    std::optional<Task> t = ParseTask(item);
    if (!t) throw ModelFormatError("bad task '" + item + "'");
    m.tasks.push_back(*t);
  }
}

void CheckExpected(const ModelConfig &have, const ModelConfig &want) {
  auto check = [](const char *name, auto a, auto b) {
    if (a != b) {
      std::ostringstream msg;
      msg << "dimension mismatch: model file has " << name << "=" << a << ", configuration expects "
          << b;
      throw ModelFormatError(msg.str());
    }
  };
  check("variant", std::string(VariantName(have.variant)), std::string(VariantName(want.variant)));
  check("vocab_size", have.vocab_size, want.vocab_size);
  check("word_dim", have.word_dim, want.word_dim);
  check("position_dim", have.position_dim, want.position_dim);
  check("dep_dim", have.dep_dim, want.dep_dim);
  check("hidden_dim", have.hidden_dim, want.hidden_dim);
  check("layers", have.layers, want.layers);
  check("position_clamp", have.position_clamp, want.position_clamp);
  if (UsesTaskInput(want.variant)) check("task_word_dim", have.task_word_dim, want.task_word_dim);
  if (UsesTaskRnn(want.variant)) {
    check("task_hidden_dim", have.task_hidden_dim, want.task_hidden_dim);
    check("task_layers", have.task_layers, want.task_layers);
  }
}

}  // namespace

std::string SerializeModel(const Model<float> &model, const ModelMetadata &metadata) {
  static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);
  std::string out(kModelMagic);
  PutU32(out, kModelFormatVersion);
  const std::string meta = MetadataText(model.config(), metadata);
  PutU32(out, static_cast<uint32_t>(meta.size()));
  out += meta;
  PutU32(out, static_cast<uint32_t>(model.params().size()));
  for (const ag::Parameter<float> &p : model.params()) {
    PutU32(out, static_cast<uint32_t>(p.name.size()));
    out += p.name;
    PutU32(out, static_cast<uint32_t>(p.value.rows()));
    PutU32(out, static_cast<uint32_t>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      PutU32(out, std::bit_cast<uint32_t>(p.value.data()[i]));
    }
  }
  return out;
}

LoadedModel DeserializeModel(std::string_view bytes, const ModelConfig *expected,
                             const uint64_t *expected_vocab_hash) {
  Reader in(bytes);
  if (in.Take(std::min(bytes.size(), kModelMagic.size()), "magic") != kModelMagic) {
    throw ModelFormatError("not a model file (bad magic)");
  }
  const uint32_t version = in.U32("version");
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  }
  ModelConfig config;
  ModelMetadata metadata;
  const uint32_t meta_len = in.U32("metadata length");
  ParseMetadata(in.Take(meta_len, "metadata"), config, metadata);
  if (expected) CheckExpected(config, *expected);
  if (expected_vocab_hash && *expected_vocab_hash != metadata.vocab_hash) {
    std::ostringstream msg;
    msg << "vocabulary hash mismatch: model " << std::hex << metadata.vocab_hash << ", vocabulary "
        << *expected_vocab_hash;
    throw ModelFormatError(msg.str());
  }
  ag::ParameterStore<float> params;
  const uint32_t count = in.U32("tensor count");
  for (uint32_t k = 0; k < count; ++k) {
    const uint32_t name_len = in.U32("tensor name length");
    std::string name(in.Take(name_len, "tensor name"));
    const uint32_t rows = in.U32("tensor rows");
    const uint32_t cols = in.U32("tensor cols");
    if (static_cast<uint64_t>(rows) * cols * 4 > bytes.size()) {
      throw ModelFormatError("truncated model file while reading tensor '" + name + "'");
    }
    ag::Parameter<float> &p = params.Add(name, static_cast<int>(rows), static_cast<int>(cols));
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      p.value.data()[i] = std::bit_cast<float>(in.U32("tensor data"));
    }
  }
  if (!in.done()) throw ModelFormatError("trailing bytes after the last tensor");
  return LoadedModel{Model<float>(config, std::move(params)), metadata};
}

void SaveModelFile(const std::string &path, const Model<float> &model,
                   const ModelMetadata &metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  const std::string bytes = SerializeModel(model, metadata);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing model file '" + path + "'");
}

LoadedModel LoadModelFile(const std::string &path, const ModelConfig *expected,
                          const uint64_t *expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return DeserializeModel(buffer.str(), expected, expected_vocab_hash);
  } catch (const ModelFormatError &e) {
    throw ModelFormatError(path + ": " + e.what());
  }
}

}  // namespace argstruct
