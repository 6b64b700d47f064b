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

#include "argstruct/nn.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "argstruct/error.h"

namespace argstruct::nn {

template <typename Real>
void AddGruParams(ParameterStore<Real> &params, const std::string &prefix, int input_dim,
                  int hidden_dim) {
  params.Add(prefix + "/W", input_dim, 3 * hidden_dim);
  params.Add(prefix + "/U_zr", hidden_dim, 2 * hidden_dim);
  params.Add(prefix + "/U_h", hidden_dim, hidden_dim);
  params.Add(prefix + "/b", 1, 3 * hidden_dim);
}

template <typename Real>
GruVars<Real> BindGru(Tape<Real> &tape, ParameterStore<Real> &params, const std::string &prefix) {
  GruVars<Real> cell;
  cell.input_weights = tape.Param(params.Get(prefix + "/W"));
  cell.gate_weights = tape.Param(params.Get(prefix + "/U_zr"));
  cell.candidate_weights = tape.Param(params.Get(prefix + "/U_h"));
  cell.bias = tape.Param(params.Get(prefix + "/b"));
  cell.hidden_dim = cell.candidate_weights.rows();
  if (cell.gate_weights.rows() != cell.hidden_dim || cell.input_weights.cols() != 3 * cell.hidden_dim ||
      cell.bias.cols() != 3 * cell.hidden_dim) {
    throw ShapeError("inconsistent GRU parameter shapes under '" + prefix + "'");
  }
  return cell;
}

namespace {

// One recurrence given the precomputed input projection xw = xW + b.
template <typename Real>
Var<Real> ProjectedStep(const GruVars<Real> &cell, Var<Real> xw, Var<Real> h_prev,
                        const Var<Real> *mask) {
  const int h = cell.hidden_dim;
  const int batch = xw.rows();
  if (h_prev.rows() != batch || h_prev.cols() != h) {
    throw ShapeError("gru: hidden state must be " + std::to_string(batch) + "x" +
                     std::to_string(h));
  }
  Var<Real> hu = ag::MatMul(h_prev, cell.gate_weights);
  Var<Real> z = ag::Sigmoid(ag::Add(ag::Slice(xw, 0, batch, 0, h), ag::Slice(hu, 0, batch, 0, h)));
  Var<Real> r = ag::Sigmoid(ag::Add(ag::Slice(xw, 0, batch, h, h), ag::Slice(hu, 0, batch, h, h)));
  Var<Real> c = ag::Tanh(ag::Add(ag::Slice(xw, 0, batch, 2 * h, h),
                                 ag::MatMul(ag::Mul(r, h_prev), cell.candidate_weights)));
  Var<Real> update = ag::Mul(z, ag::Sub(c, h_prev));
  if (mask) update = ag::Mul(update, *mask);
  return ag::Add(h_prev, update);
}

}  // namespace

template <typename Real>
Var<Real> GruStep(const GruVars<Real> &cell, Var<Real> x, Var<Real> h_prev) {
  if (x.cols() != cell.input_weights.rows()) {
    throw ShapeError("gru: input width " + std::to_string(x.cols()) + " but cell expects " +
                     std::to_string(cell.input_weights.rows()));
  }
  Var<Real> xw = ag::AddBias(ag::MatMul(x, cell.input_weights), cell.bias);
  return ProjectedStep(cell, xw, h_prev, static_cast<const Var<Real> *>(nullptr));
}

template <typename Real>
Var<Real> GruLayer(const GruVars<Real> &cell, Var<Real> inputs, int steps, int batch,
                   Direction direction, const std::vector<Var<Real>> &masks) {
  if (inputs.rows() != steps * batch) throw ShapeError("gru layer: rows != steps * batch");
  if (inputs.cols() != cell.input_weights.rows()) {
    throw ShapeError("gru layer: input width " + std::to_string(inputs.cols()) +
                     " but cell expects " + std::to_string(cell.input_weights.rows()));
  }
  if (!masks.empty() && static_cast<int>(masks.size()) != steps) {
    throw ShapeError("gru layer: need one mask per step");
  }
  Tape<Real> &tape = *inputs.tape();
  const int h = cell.hidden_dim;
  Var<Real> projected = ag::AddBias(ag::MatMul(inputs, cell.input_weights), cell.bias);
  Var<Real> state = tape.Constant(Matrix<Real>::Zero(batch, h));
  std::vector<Var<Real>> outputs(steps);
  for (int k = 0; k < steps; ++k) {
    const int t = direction == Direction::kLeftToRight ? k : steps - 1 - k;
    Var<Real> xw = ag::Slice(projected, t * batch, batch, 0, 3 * h);
    state = ProjectedStep(cell, xw, state, masks.empty() ? nullptr : &masks[t]);
    outputs[t] = state;
  }
  return ag::StackRows<Real>(outputs);
}

template <typename Real>
void AddStackParams(ParameterStore<Real> &params, const std::string &prefix, int input_dim,
                    const StackConfig &config) {
  if (config.layers < 1) throw ConfigError("GRU stack needs at least one layer");
  int width = input_dim;
  for (int l = 1; l <= config.layers; ++l) {
    AddGruParams(params, prefix + "/gru" + std::to_string(l), width, config.hidden_dim);
    width = config.hidden_dim;
  }
}

template <typename Real>
Var<Real> StackedBiGru(Tape<Real> &tape, ParameterStore<Real> &params, const std::string &prefix,
                       Var<Real> inputs, int steps, int batch, const StackConfig &config,
                       const std::vector<Var<Real>> &masks, std::mt19937_64 *rng) {
  if (config.layers < 1) throw ConfigError("GRU stack needs at least one layer");
  Var<Real> current = inputs;
  for (int l = 1; l <= config.layers; ++l) {
    GruVars<Real> cell = BindGru(tape, params, prefix + "/gru" + std::to_string(l));
    Var<Real> layer_in = ag::Dropout(current, config.dropout, rng);
    const Direction direction = l % 2 == 1 ? Direction::kLeftToRight : Direction::kRightToLeft;
    Var<Real> out = GruLayer(cell, layer_in, steps, batch, direction, masks);
    if (config.residual && l >= 2 && out.cols() == current.cols()) out = ag::Add(out, current);
    current = out;
  }
  return current;
}

template <typename Real>
Var<Real> OutputHead(Var<Real> weights, Var<Real> bias, Var<Real> hidden) {
  return ag::AddBias(ag::MatMul(hidden, weights), bias);
}

template <typename Real>
void InitUniform(Parameter<Real> &param, double limit, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index i = 0; i < param.value.size(); ++i) {
    param.value.data()[i] = static_cast<Real>(u(rng));
  }
}

template <typename Real>
void InitGlorot(Parameter<Real> &param, int block, std::mt19937_64 &rng) {
  const int cols = block > 0 ? block : static_cast<int>(param.value.cols());
  InitUniform(param, std::sqrt(6.0 / (param.value.rows() + cols)), rng);
}

template <typename Real>
int LoadPretrainedEmbeddings(const std::string &path, const Vocabulary &vocab,
                             Parameter<Real> &table) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file '" + path + "'");
  const int dim = static_cast<int>(table.value.cols());
  std::string line;
  int line_no = 0;
  int replaced = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != dim) {
      throw Error(path + ": line " + std::to_string(line_no) + " has dimension " +
                  std::to_string(values.size()) + ", expected " + std::to_string(dim));
    }
    const int id = vocab.Lookup(word);
    if (id == Vocabulary::kUnk || id >= table.value.rows()) continue;
    for (int c = 0; c < dim; ++c) table.value(id, c) = static_cast<Real>(values[c]);
    ++replaced;
  }
  return replaced;
}

#define ARGSTRUCT_INSTANTIATE_NN(Real)                                                        \
  template void AddGruParams(ParameterStore<Real> &, const std::string &, int, int);         \
  template GruVars<Real> BindGru(Tape<Real> &, ParameterStore<Real> &, const std::string &); \
  template Var<Real> GruStep(const GruVars<Real> &, Var<Real>, Var<Real>);                    \
  template Var<Real> GruLayer(const GruVars<Real> &, Var<Real>, int, int, Direction,         \
                              const std::vector<Var<Real>> &);                               \
  template void AddStackParams(ParameterStore<Real> &, const std::string &, int,             \
                               const StackConfig &);                                         \
  template Var<Real> StackedBiGru(Tape<Real> &, ParameterStore<Real> &, const std::string &, \
                                  Var<Real>, int, int, const StackConfig &,                  \
                                  const std::vector<Var<Real>> &, std::mt19937_64 *);        \
  template Var<Real> OutputHead(Var<Real>, Var<Real>, Var<Real>);                             \
  template void InitUniform(Parameter<Real> &, double, std::mt19937_64 &);                    \
  template void InitGlorot(Parameter<Real> &, int, std::mt19937_64 &);                        \
  template int LoadPretrainedEmbeddings(const std::string &, const Vocabulary &,             \
                                        Parameter<Real> &);

ARGSTRUCT_INSTANTIATE_NN(float)
ARGSTRUCT_INSTANTIATE_NN(double)

}  // namespace argstruct::nn
