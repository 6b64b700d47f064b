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

// Whole-model gradient verification on a small built-in fixture.

#ifndef ARGSTRUCT_VERIFY_H_
#define ARGSTRUCT_VERIFY_H_

#include <string>

#include "argstruct/corpus.h"
#include "argstruct/gradcheck.h"
#include "argstruct/model.h"

namespace argstruct {

// A 5-token sentence carrying one predicate and one event-noun instance,
// followed by a 3-token sentence whose predicate makes the PASA batch padded.
std::string GradcheckFixtureText();

// Small dimensions so that every parameter element can be perturbed.
ModelConfig GradcheckModelConfig(Variant variant, int vocab_size);

// Checks d(loss)/dθ for every parameter of `variant`, where the loss sums
// the mean cross-entropy of the fixture's PASA batch and ENASA batch.
ag::GradientCheckReport CheckModelGradients(Variant variant, double tolerance = 1e-4,
                                            uint64_t seed = 11);

}  // namespace argstruct

#endif  // ARGSTRUCT_VERIFY_H_
