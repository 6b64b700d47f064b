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

// Random valid generator configurations for fuzz tests.

#ifndef ARGSTRUCT_TESTS_GEN_FUZZ_H_
#define ARGSTRUCT_TESTS_GEN_FUZZ_H_

#include <algorithm>
#include <random>

#include "argstruct/synthgen.h"

namespace argstruct::testing {

inline GenConfig RandomGenConfig(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  GenConfig g;
  g.seed = rng();
  g.num_nouns = pick(1, 80);
  g.num_stems = pick(2, 30);
  g.num_fillers = pick(1, 8);
  g.share_rate = unit(rng);
  g.train_pasa = pick(0, 12);
  g.dev_pasa = pick(0, 4);
  g.test_pasa = pick(0, 4);
  g.enasa_ratio = 2.0 * unit(rng);
  for (double &r : g.case_rate) r = unit(rng);
  const double p = unit(rng);
  g.pasa_pattern = {p, 1.0 - p};
  const double a = unit(rng), b = unit(rng) * (1.0 - a);
  g.enasa_pattern = {a, b, 1.0 - a - b};
  g.attributive_rate = unit(rng);
  g.max_distractors = pick(0, 4);
  g.min_tokens = pick(1, 12);
  g.max_tokens = std::max(g.min_tokens + 1, pick(11, 40));
  g.sentences_per_doc = pick(1, 12);
  g.starve_fraction = unit(rng);
  g.starve_weight = unit(rng);
  // Keep at least one stem per task.
  if (g.num_stems < 3 && g.share_rate < 0.5) g.share_rate = 1.0;
  return g;
}

}  // namespace argstruct::testing

#endif  // ARGSTRUCT_TESTS_GEN_FUZZ_H_
