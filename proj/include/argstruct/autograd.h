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

// Tape-based reverse-mode differentiation over dense row-major matrices.
//
// Every op appends a node holding its forward value and a closure that
// scatters the node's gradient into its inputs. Nodes are created in
// topological order, so Backward() simply walks the tape in reverse.
//
// Scalar type is a template parameter: float for training, double for
// gradient checking. Both are explicitly instantiated in autograd.cc.

#ifndef ARGSTRUCT_AUTOGRAD_H_
#define ARGSTRUCT_AUTOGRAD_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace argstruct::ag {

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
struct Parameter {
  std::string name;
  Matrix<Real> value;
  Matrix<Real> grad;
};

// Named parameters in insertion order. Element addresses are stable.
template <typename Real>
class ParameterStore {
 public:
  Parameter<Real> &Add(const std::string &name, int rows, int cols);
  Parameter<Real> *Find(std::string_view name);
  const Parameter<Real> *Find(std::string_view name) const;
  Parameter<Real> &Get(std::string_view name);
  const Parameter<Real> &Get(std::string_view name) const;

  size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void ZeroGrad();
  int64_t NumElements() const;

  template <typename Other>
  ParameterStore<Other> Cast() const {
    ParameterStore<Other> out;
    for (const Parameter<Real> &p : params_) {
      Parameter<Other> &q = out.Add(p.name, static_cast<int>(p.value.rows()),
                                    static_cast<int>(p.value.cols()));
      q.value = p.value.template cast<Other>();
    }
    return out;
  }

 private:
  std::deque<Parameter<Real>> params_;
  std::unordered_map<std::string, size_t> index_;
};

template <typename Real>
class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
template <typename Real>
class Var {
 public:
  Var() = default;
  Var(Tape<Real> *tape, int id) : tape_(tape), id_(id) {}

  Tape<Real> *tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Matrix<Real> &value() const;
  // Zero-sized until Backward() reached this node.
  const Matrix<Real> &grad() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }

 private:
  Tape<Real> *tape_ = nullptr;
  int id_ = -1;
};

template <typename Real>
class Tape {
 public:
  using Mat = Matrix<Real>;
  using BackwardFn = std::function<void(Tape &, int)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var<Real> Constant(Mat value);
  // Differentiable leaf without a backing parameter.
  Var<Real> Input(Mat value);
  // Leaf whose gradient is added into `param.grad` by Backward(). The node
  // reads `param.value` in place; do not modify it while the tape is alive.
  Var<Real> Param(Parameter<Real> &param);

  // Appends an op node. `fn` runs only if some input requires a gradient.
  Var<Real> Record(const char *op, Mat value, std::initializer_list<Var<Real>> inputs,
                   BackwardFn fn);
  Var<Real> Record(const char *op, Mat value, std::span<const Var<Real>> inputs, BackwardFn fn);

  // Requires a 1x1 loss. Accumulates into parameter gradients.
  void Backward(Var<Real> loss);

  const Mat &value(int id) const {
    const Node &node = nodes_[id];
    return node.param ? node.param->value : node.value;
  }
  const Mat &grad(int id) const { return nodes_[id].grad; }
  // Gradient buffer of `id`, allocating zeros on first use.
  Mat &GradBuffer(int id);
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  const char *op(int id) const { return nodes_[id].op; }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const char *op;
    Mat value;
    Mat grad;
    bool requires_grad = false;
    Parameter<Real> *param = nullptr;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::unordered_map<Parameter<Real> *, int> param_nodes_;
};

// Test hook: scales the incoming gradient of every node of the named op by
// 0.5 during Backward(). Empty string disables it.
void SetFaultInjection(std::string op);
const std::string &FaultInjection();

template <typename Real> Var<Real> MatMul(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> Add(Var<Real> a, Var<Real> b);
// a (n x m) + bias (1 x m) on every row.
template <typename Real> Var<Real> AddBias(Var<Real> a, Var<Real> bias);
template <typename Real> Var<Real> Sub(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> Mul(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> Sigmoid(Var<Real> a);
template <typename Real> Var<Real> Tanh(Var<Real> a);
template <typename Real> Var<Real> Sum(Var<Real> a);
template <typename Real> Var<Real> ConcatCols(std::span<const Var<Real>> parts);
template <typename Real> Var<Real> StackRows(std::span<const Var<Real>> parts);
template <typename Real>
Var<Real> Slice(Var<Real> a, int row, int rows, int col, int cols);
// Rows of `table` selected by `ids`; backward scatter-adds into the table.
template <typename Real> Var<Real> Gather(Var<Real> table, std::span<const int> ids);
// Inverted dropout. `rng == nullptr` or rate == 0 is the identity.
template <typename Real> Var<Real> Dropout(Var<Real> a, double rate, std::mt19937_64 *rng);
// Row-wise softmax with max subtraction.
template <typename Real> Var<Real> Softmax(Var<Real> logits);
// Mean over rows with mask != 0 of -log probs(row, gold[row]).
template <typename Real>
Var<Real> CrossEntropy(Var<Real> probs, std::span<const int> gold, std::span<const Real> mask);
// Fused softmax + cross entropy on logits; same reduction as CrossEntropy.
template <typename Real>
Var<Real> SoftmaxCrossEntropy(Var<Real> logits, std::span<const int> gold,
                              std::span<const Real> mask);

// Plain (non-tape) helpers shared with tests and inference.
template <typename Real> Matrix<Real> SoftmaxRows(const Matrix<Real> &logits);

}  // namespace argstruct::ag

#endif  // ARGSTRUCT_AUTOGRAD_H_
