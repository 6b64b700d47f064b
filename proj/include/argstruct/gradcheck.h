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

// Central-difference gradient checking in double precision.
//
// Stochastic ops must be made deterministic by the caller: the model checks
// run with dropout disabled, the op-level dropout check reseeds its RNG on
// every evaluation so both sides see the same mask.

#ifndef ARGSTRUCT_GRADCHECK_H_
#define ARGSTRUCT_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "argstruct/autograd.h"

namespace argstruct::ag {

struct ParameterCheck {
  std::string name;
  int64_t elements = 0;
  double max_rel_error = 0.0;
  int64_t worst_index = -1;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
  bool passed = true;
};

struct GradientCheckReport {
  double tolerance = 0.0;
  std::vector<ParameterCheck> checks;

  bool passed() const;
  std::vector<std::string> FailedNames() const;
  std::string ToString() const;
};

// max(|g - n| / (|g| + |n| + 1e-8)) per element.
double RelativeError(double analytic, double numeric);

using LossFn = std::function<Var<double>(Tape<double> &)>;

// Compares Backward() against (L(θ+h) - L(θ-h)) / 2h for every element of
// every parameter in `params`. `loss_fn` must read parameters through
// tape.Param() on each call.
GradientCheckReport GradientCheck(const LossFn &loss_fn, ParameterStore<double> &params,
                                  double tolerance = 1e-4, double step = 1e-5);

// Checks every differentiable op in isolation on random shapes with
// dimensions in [1, max_dim]. One entry per op, named after the op.
GradientCheckReport CheckOps(double tolerance = 1e-4, uint64_t seed = 7, int max_dim = 8);

}  // namespace argstruct::ag

#endif  // ARGSTRUCT_GRADCHECK_H_
