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

// Network layers: GRU cell, the alternating-direction GRU stack with residual
// connections, the linear output head, and parameter initializers.
//
// Row-vector convention throughout: a batch of B inputs is a B x in matrix and
// a time-major sequence of T steps is stacked as T*B rows (row t*B + b).

#ifndef ARGSTRUCT_NN_H_
#define ARGSTRUCT_NN_H_

#include <random>
#include <string>
#include <vector>

#include "argstruct/autograd.h"
#include "argstruct/features.h"

namespace argstruct::nn {

using ag::Matrix;
using ag::Parameter;
using ag::ParameterStore;
using ag::Tape;
using ag::Var;

// Parameter names under `prefix`:
//   W     in x 3h   input weights for [update | reset | candidate]
//   U_zr  h x 2h    recurrent weights for [update | reset]
//   U_h   h x h     recurrent weights of the candidate (applied to r * h)
//   b     1 x 3h
template <typename Real>
void AddGruParams(ParameterStore<Real> &params, const std::string &prefix, int input_dim,
                  int hidden_dim);

template <typename Real>
struct GruVars {
  Var<Real> input_weights;
  Var<Real> gate_weights;
  Var<Real> candidate_weights;
  Var<Real> bias;
  int hidden_dim = 0;
};

template <typename Real>
GruVars<Real> BindGru(Tape<Real> &tape, ParameterStore<Real> &params, const std::string &prefix);

// z = σ(xW_z + hU_z + b_z), r = σ(xW_r + hU_r + b_r),
// c = tanh(xW_h + (r ⊙ h)U_h + b_h), h' = (1 - z) ⊙ h + z ⊙ c.
template <typename Real>
Var<Real> GruStep(const GruVars<Real> &cell, Var<Real> x, Var<Real> h_prev);

enum class Direction { kLeftToRight, kRightToLeft };

// Runs one GRU layer over `inputs` (steps*batch rows). `masks` is empty when
// every sequence has full length, otherwise one batch x hidden 0/1 constant
// per step; masked rows carry the previous state through unchanged.
template <typename Real>
Var<Real> GruLayer(const GruVars<Real> &cell, Var<Real> inputs, int steps, int batch,
                   Direction direction, const std::vector<Var<Real>> &masks);

struct StackConfig {
  int layers = 4;
  int hidden_dim = 300;
  bool residual = true;
  double dropout = 0.0;
};

template <typename Real>
void AddStackParams(ParameterStore<Real> &params, const std::string &prefix, int input_dim,
                    const StackConfig &config);

// Layer l (1-based) runs left-to-right when odd, right-to-left when even.
// From layer 2 on the layer input is added to its output when residual is set
// and widths agree. Dropout (rng != nullptr) is applied to each layer input.
template <typename Real>
Var<Real> StackedBiGru(Tape<Real> &tape, ParameterStore<Real> &params, const std::string &prefix,
                       Var<Real> inputs, int steps, int batch, const StackConfig &config,
                       const std::vector<Var<Real>> &masks, std::mt19937_64 *rng);

// h W + b with W hidden x 4, b 1 x 4.
template <typename Real>
Var<Real> OutputHead(Var<Real> weights, Var<Real> bias, Var<Real> hidden);

template <typename Real>
void InitUniform(Parameter<Real> &param, double limit, std::mt19937_64 &rng);

// Glorot-uniform over column blocks of width `block` (whole matrix if 0).
template <typename Real>
void InitGlorot(Parameter<Real> &param, int block, std::mt19937_64 &rng);

// Overwrites rows of `table` for words listed in a `word v1 ... vd` text
// file. Returns the number of rows replaced. Throws Error when a line's
// dimension differs from the table width.
template <typename Real>
int LoadPretrainedEmbeddings(const std::string &path, const Vocabulary &vocab,
                             Parameter<Real> &table);

}  // namespace argstruct::nn

#endif  // ARGSTRUCT_NN_H_
