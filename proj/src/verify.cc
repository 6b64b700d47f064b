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

#include "argstruct/verify.h"

#include "argstruct/features.h"
#include "argstruct/train.h"

namespace argstruct {

std::string GradcheckFixtureText() {
  return "#DOC gradcheck\n"
         "#DEP 2 2 -1\n"
         "0\ttaro\t0\t_\tNOM=e1;NOM=p1\n"
         "1\tga\t0\t_\t_\n"
         "2\thoukoku\t1\tEVENT:e1\tACC=p1\n"
         "3\two\t1\t_\t_\n"
         "4\tshita\t2\tPRED:p1\t_\n"
         "\n"
         "#DEP 1 -1\n"
         "0\thanako\t0\t_\tNOM=p2\n"
         "1\tga\t0\t_\t_\n"
         "2\tshita\t1\tPRED:p2\t_\n"
         "\n";
}

ModelConfig GradcheckModelConfig(Variant variant, int vocab_size) {
  ModelConfig c;
  c.variant = variant;
  c.vocab_size = vocab_size;
  c.word_dim = 3;
  c.position_dim = 2;
  c.dep_dim = 2;
  c.hidden_dim = 4;
  c.layers = 3;
  c.task_word_dim = 2;
  c.task_hidden_dim = 4;
  c.task_layers = 2;
  c.position_clamp = 4;
  c.residual = true;
  c.dropout = 0.0;
  return c;
}

ag::GradientCheckReport CheckModelGradients(Variant variant, double tolerance, uint64_t seed) {
  const Corpus corpus = Preprocess(ParseCorpusString(GradcheckFixtureText()), PreprocessOptions{});
  const Vocabulary vocab = Vocabulary::Build(corpus, 1);
  Model<double> model(GradcheckModelConfig(variant, vocab.size()), seed);
  const Task tasks[] = {Task::kPasa, Task::kEnasa};
  const std::vector<Example> examples = MakeExamples(corpus, vocab, tasks);
  std::vector<Batch> batches;
  for (Task task : tasks) {
    std::vector<const Example *> members;
    for (const Example &ex : examples) {
      if (ex.instance->task == task) members.push_back(&ex);
    }
    batches.push_back(MakeBatch(members, model.config().position_clamp));
  }
  auto loss_fn = [&](ag::Tape<double> &tape) {
    ag::Var<double> total = BatchLoss(model, tape, batches[0], nullptr);
    for (size_t k = 1; k < batches.size(); ++k) {
      total = ag::Add(total, BatchLoss(model, tape, batches[k], nullptr));
    }
    return total;
  };
  return ag::GradientCheck(loss_fn, model.params(), tolerance);
}

}  // namespace argstruct
