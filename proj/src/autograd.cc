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

#include "argstruct/autograd.h"

#include <cmath>
#include <string>

#include "argstruct/error.h"

namespace argstruct::ag {

namespace {

std::string &FaultSlot() {
  static std::string op;
  return op;
}

std::string ShapeString(int rows, int cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename Real>
void RequireSameShape(const char *op, const Var<Real> &a, const Var<Real> &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + ShapeString(a.rows(), a.cols()) +
                     " vs " + ShapeString(b.rows(), b.cols()));
  }
}

}  // namespace

void SetFaultInjection(std::string op) { FaultSlot() = std::move(op); }
const std::string &FaultInjection() { return FaultSlot(); }

template <typename Real>
Parameter<Real> &ParameterStore<Real>::Add(const std::string &name, int rows, int cols) {
  if (index_.count(name)) throw Error("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  Parameter<Real> &p = params_.emplace_back();
  p.name = name;
  p.value = Matrix<Real>::Zero(rows, cols);
  p.grad = Matrix<Real>::Zero(rows, cols);
  return p;
}

template <typename Real>
Parameter<Real> *ParameterStore<Real>::Find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename Real>
const Parameter<Real> *ParameterStore<Real>::Find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename Real>
Parameter<Real> &ParameterStore<Real>::Get(std::string_view name) {
  Parameter<Real> *p = Find(name);
  if (!p) throw Error("unknown parameter '" + std::string(name) + "'");
  return *p;
}

template <typename Real>
const Parameter<Real> &ParameterStore<Real>::Get(std::string_view name) const {
  const Parameter<Real> *p = Find(name);
  if (!p) throw Error("unknown parameter '" + std::string(name) + "'");
  return *p;
}

template <typename Real>
void ParameterStore<Real>::ZeroGrad() {
  for (Parameter<Real> &p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

template <typename Real>
int64_t ParameterStore<Real>::NumElements() const {
  int64_t n = 0;
  for (const Parameter<Real> &p : params_) n += p.value.size();
  return n;
}

template <typename Real>
const Matrix<Real> &Var<Real>::value() const {
  return tape_->value(id_);
}

template <typename Real>
const Matrix<Real> &Var<Real>::grad() const {
  return tape_->grad(id_);
}

template <typename Real>
Var<Real> Tape<Real>::Constant(Mat value) {
  nodes_.push_back(Node{"constant", std::move(value), Mat(), false, nullptr, nullptr});
  return Var<Real>(this, static_cast<int>(nodes_.size()) - 1);
}

template <typename Real>
Var<Real> Tape<Real>::Input(Mat value) {
  nodes_.push_back(Node{"input", std::move(value), Mat(), true, nullptr, nullptr});
  return Var<Real>(this, static_cast<int>(nodes_.size()) - 1);
}

template <typename Real>
Var<Real> Tape<Real>::Param(Parameter<Real> &param) {
  auto it = param_nodes_.find(&param);
  if (it != param_nodes_.end()) return Var<Real>(this, it->second);
  if (param.grad.rows() != param.value.rows() || param.grad.cols() != param.value.cols()) {
    param.grad = Mat::Zero(param.value.rows(), param.value.cols());
  }
  nodes_.push_back(Node{"param", Mat(), Mat(), true, &param, nullptr});
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[&param] = id;
  return Var<Real>(this, id);
}

template <typename Real>
Var<Real> Tape<Real>::Record(const char *op, Mat value, std::initializer_list<Var<Real>> inputs,
                             BackwardFn fn) {
  return Record(op, std::move(value), std::span<const Var<Real>>(inputs.begin(), inputs.size()),
                std::move(fn));
}

template <typename Real>
Var<Real> Tape<Real>::Record(const char *op, Mat value, std::span<const Var<Real>> inputs,
                             BackwardFn fn) {
  bool needs_grad = false;
  for (const Var<Real> &in : inputs) {
    if (in.tape() != this) throw Error(std::string(op) + ": input from another tape");
    needs_grad = needs_grad || nodes_[in.id()].requires_grad;
  }
#ifndef NDEBUG
  if (!value.allFinite()) throw Error(std::string(op) + ": non-finite forward value");
#endif
  nodes_.push_back(Node{op, std::move(value), Mat(), needs_grad, nullptr,
                        needs_grad ? std::move(fn) : BackwardFn()});
  return Var<Real>(this, static_cast<int>(nodes_.size()) - 1);
}

template <typename Real>
typename Tape<Real>::Mat &Tape<Real>::GradBuffer(int id) {
  Node &node = nodes_[id];
  if (node.grad.size() == 0) {
    const Mat &v = value(id);
    node.grad = Mat::Zero(v.rows(), v.cols());
  }
  return node.grad;
}

template <typename Real>
void Tape<Real>::Backward(Var<Real> loss) {
  if (loss.tape() != this) throw Error("backward: loss belongs to another tape");
  const Mat &value = this->value(loss.id());
  if (value.rows() != 1 || value.cols() != 1) {
    throw ShapeError("backward requires a scalar loss, got " +
                     ShapeString(static_cast<int>(value.rows()), static_cast<int>(value.cols())));
  }
  GradBuffer(loss.id()).array() += Real(1);
  const std::string &fault = FaultInjection();
  for (int i = loss.id(); i >= 0; --i) {
    Node &node = nodes_[i];
    if (!node.requires_grad || node.grad.size() == 0) continue;
    if (!fault.empty() && fault == node.op) node.grad *= Real(0.5);
    if (node.param) {
      node.param->grad += node.grad;
    } else if (node.backward) {
      node.backward(*this, i);
    }
  }
}

template <typename Real>
Var<Real> MatMul(Var<Real> a, Var<Real> b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + ShapeString(a.rows(), a.cols()) + " * " +
                     ShapeString(b.rows(), b.cols()));
  }
  Matrix<Real> value(a.rows(), b.cols());
  value.noalias() = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record("matmul", std::move(value), {a, b}, [ia, ib](Tape<Real> &t, int self) {
    const Matrix<Real> &g = t.grad(self);
    if (t.requires_grad(ia)) t.GradBuffer(ia).noalias() += g * t.value(ib).transpose();
    if (t.requires_grad(ib)) t.GradBuffer(ib).noalias() += t.value(ia).transpose() * g;
  });
}

template <typename Real>
Var<Real> Add(Var<Real> a, Var<Real> b) {
  RequireSameShape("add", a, b);
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record("add", a.value() + b.value(), {a, b}, [ia, ib](Tape<Real> &t, int self) {
    if (t.requires_grad(ia)) t.GradBuffer(ia) += t.grad(self);
    if (t.requires_grad(ib)) t.GradBuffer(ib) += t.grad(self);
  });
}

template <typename Real>
Var<Real> AddBias(Var<Real> a, Var<Real> bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_bias: " + ShapeString(a.rows(), a.cols()) + " + " +
                     ShapeString(bias.rows(), bias.cols()));
  }
  Matrix<Real> value = a.value();
  value.rowwise() += bias.value().row(0);
  const int ia = a.id(), ib = bias.id();
  return a.tape()->Record("add_bias", std::move(value), {a, bias},
                          [ia, ib](Tape<Real> &t, int self) {
                            const Matrix<Real> &g = t.grad(self);
                            if (t.requires_grad(ia)) t.GradBuffer(ia) += g;
                            if (t.requires_grad(ib)) t.GradBuffer(ib) += g.colwise().sum();
                          });
}

template <typename Real>
Var<Real> Sub(Var<Real> a, Var<Real> b) {
  RequireSameShape("sub", a, b);
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record("sub", a.value() - b.value(), {a, b}, [ia, ib](Tape<Real> &t, int self) {
    if (t.requires_grad(ia)) t.GradBuffer(ia) += t.grad(self);
    if (t.requires_grad(ib)) t.GradBuffer(ib) -= t.grad(self);
  });
}

template <typename Real>
Var<Real> Mul(Var<Real> a, Var<Real> b) {
  RequireSameShape("mul", a, b);
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record("mul", a.value().cwiseProduct(b.value()), {a, b},
                          [ia, ib](Tape<Real> &t, int self) {
                            const Matrix<Real> &g = t.grad(self);
                            if (t.requires_grad(ia)) t.GradBuffer(ia) += g.cwiseProduct(t.value(ib));
                            if (t.requires_grad(ib)) t.GradBuffer(ib) += g.cwiseProduct(t.value(ia));
                          });
}

template <typename Real>
Var<Real> Sigmoid(Var<Real> a) {
  Matrix<Real> value = a.value().unaryExpr([](Real x) {
    // Split by sign so exp never overflows.
    if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
    const Real e = std::exp(x);
    return e / (Real(1) + e);
  });
  const int ia = a.id();
  return a.tape()->Record("sigmoid", std::move(value), {a}, [ia](Tape<Real> &t, int self) {
    const auto y = t.value(self).array();
    t.GradBuffer(ia).array() += t.grad(self).array() * y * (Real(1) - y);
  });
}

template <typename Real>
Var<Real> Tanh(Var<Real> a) {
  Matrix<Real> value = a.value().array().tanh().matrix();
  const int ia = a.id();
  return a.tape()->Record("tanh", std::move(value), {a}, [ia](Tape<Real> &t, int self) {
    const auto y = t.value(self).array();
    t.GradBuffer(ia).array() += t.grad(self).array() * (Real(1) - y * y);
  });
}

template <typename Real>
Var<Real> Sum(Var<Real> a) {
  Matrix<Real> value(1, 1);
  value(0, 0) = a.value().sum();
  const int ia = a.id();
  return a.tape()->Record("sum", std::move(value), {a}, [ia](Tape<Real> &t, int self) {
    t.GradBuffer(ia).array() += t.grad(self)(0, 0);
  });
}

template <typename Real>
Var<Real> ConcatCols(std::span<const Var<Real>> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const int rows = parts[0].rows();
  int cols = 0;
  for (const Var<Real> &p : parts) {
    if (p.rows() != rows) throw ShapeError("concat: row mismatch");
    cols += p.cols();
  }
  Matrix<Real> value(rows, cols);
  std::vector<int> ids, offsets;
  int offset = 0;
  for (const Var<Real> &p : parts) {
    value.middleCols(offset, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += p.cols();
  }
  return parts[0].tape()->Record(
      "concat", std::move(value), parts, [ids, offsets](Tape<Real> &t, int self) {
        const Matrix<Real> &g = t.grad(self);
        for (size_t k = 0; k < ids.size(); ++k) {
          if (!t.requires_grad(ids[k])) continue;
          Matrix<Real> &gk = t.GradBuffer(ids[k]);
          gk += g.middleCols(offsets[k], gk.cols());
        }
      });
}

template <typename Real>
Var<Real> StackRows(std::span<const Var<Real>> parts) {
  if (parts.empty()) throw ShapeError("stack_rows: no inputs");
  const int cols = parts[0].cols();
  int rows = 0;
  for (const Var<Real> &p : parts) {
    if (p.cols() != cols) throw ShapeError("stack_rows: column mismatch");
    rows += p.rows();
  }
  Matrix<Real> value(rows, cols);
  std::vector<int> ids, offsets;
  int offset = 0;
  for (const Var<Real> &p : parts) {
    value.middleRows(offset, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += p.rows();
  }
  return parts[0].tape()->Record(
      "stack_rows", std::move(value), parts, [ids, offsets](Tape<Real> &t, int self) {
        const Matrix<Real> &g = t.grad(self);
        for (size_t k = 0; k < ids.size(); ++k) {
          if (!t.requires_grad(ids[k])) continue;
          Matrix<Real> &gk = t.GradBuffer(ids[k]);
          gk += g.middleRows(offsets[k], gk.rows());
        }
      });
}

template <typename Real>
Var<Real> Slice(Var<Real> a, int row, int rows, int col, int cols) {
  if (row < 0 || col < 0 || rows < 0 || cols < 0 || row + rows > a.rows() ||
      col + cols > a.cols()) {
    throw ShapeError("slice out of range of " + ShapeString(a.rows(), a.cols()));
  }
  Matrix<Real> value = a.value().block(row, col, rows, cols);
  const int ia = a.id();
  return a.tape()->Record("slice", std::move(value), {a},
                          [ia, row, rows, col, cols](Tape<Real> &t, int self) {
                            t.GradBuffer(ia).block(row, col, rows, cols) += t.grad(self);
                          });
}

template <typename Real>
Var<Real> Gather(Var<Real> table, std::span<const int> ids) {
  const int n = static_cast<int>(ids.size());
  Matrix<Real> value(n, table.cols());
  const Matrix<Real> &src = table.value();
  for (int k = 0; k < n; ++k) {
    if (ids[k] < 0 || ids[k] >= src.rows()) {
      throw ShapeError("gather: index " + std::to_string(ids[k]) + " outside table of " +
                       std::to_string(src.rows()) + " rows");
    }
    value.row(k) = src.row(ids[k]);
  }
  std::vector<int> rows(ids.begin(), ids.end());
  const int it = table.id();
  return table.tape()->Record("gather", std::move(value), {table},
                              [it, rows](Tape<Real> &t, int self) {
                                const Matrix<Real> &g = t.grad(self);
                                Matrix<Real> &gt = t.GradBuffer(it);
                                for (size_t k = 0; k < rows.size(); ++k) gt.row(rows[k]) += g.row(k);
                              });
}

template <typename Real>
Var<Real> Dropout(Var<Real> a, double rate, std::mt19937_64 *rng) {
  if (rng == nullptr || rate <= 0.0) return a;
  if (rate >= 1.0) throw Error("dropout rate must be < 1");
  const Real scale = static_cast<Real>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix<Real> mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = uniform(*rng) < rate ? Real(0) : scale;
  }
  Matrix<Real> value = a.value().cwiseProduct(mask);
  const int ia = a.id();
  return a.tape()->Record("dropout", std::move(value), {a},
                          [ia, mask = std::move(mask)](Tape<Real> &t, int self) {
                            t.GradBuffer(ia) += t.grad(self).cwiseProduct(mask);
                          });
}

template <typename Real>
Matrix<Real> SoftmaxRows(const Matrix<Real> &logits) {
  Matrix<Real> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Real max = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - max).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Real>
Var<Real> Softmax(Var<Real> logits) {
  const int ia = logits.id();
  return logits.tape()->Record("softmax", SoftmaxRows(logits.value()), {logits},
                               [ia](Tape<Real> &t, int self) {
                                 const Matrix<Real> &y = t.value(self);
                                 const Matrix<Real> &g = t.grad(self);
                                 Matrix<Real> &gx = t.GradBuffer(ia);
                                 for (Eigen::Index r = 0; r < y.rows(); ++r) {
                                   const Real dot = g.row(r).dot(y.row(r));
                                   gx.row(r).array() +=
                                       y.row(r).array() * (g.row(r).array() - dot);
                                 }
                               });
}

namespace {

template <typename Real>
Real MaskTotal(std::span<const int> gold, std::span<const Real> mask, int rows, int cols) {
  if (static_cast<int>(gold.size()) != rows || static_cast<int>(mask.size()) != rows) {
    throw ShapeError("cross_entropy: " + std::to_string(rows) + " rows but " +
                     std::to_string(gold.size()) + " labels / " + std::to_string(mask.size()) +
                     " mask entries");
  }
  Real total = 0;
  for (int r = 0; r < rows; ++r) {
    if (mask[r] != 0 && (gold[r] < 0 || gold[r] >= cols)) {
      throw Error("cross_entropy: gold class " + std::to_string(gold[r]) + " out of range");
    }
    total += mask[r];
  }
  return total;
}

}  // namespace

template <typename Real>
Var<Real> CrossEntropy(Var<Real> probs, std::span<const int> gold, std::span<const Real> mask) {
  const Real total = MaskTotal(gold, mask, probs.rows(), probs.cols());
  const Matrix<Real> &p = probs.value();
  Real loss = 0;
  for (int r = 0; r < probs.rows(); ++r) {
    if (mask[r] != 0) loss -= mask[r] * std::log(p(r, gold[r]));
  }
  Matrix<Real> value(1, 1);
  value(0, 0) = total > 0 ? loss / total : Real(0);
  std::vector<int> labels(gold.begin(), gold.end());
  std::vector<Real> weights(mask.begin(), mask.end());
  const int ia = probs.id();
  return probs.tape()->Record(
      "cross_entropy", std::move(value), {probs},
      [ia, labels, weights, total](Tape<Real> &t, int self) {
        if (total <= 0) return;
        const Real g = t.grad(self)(0, 0);
        const Matrix<Real> &p = t.value(ia);
        Matrix<Real> &gp = t.GradBuffer(ia);
        for (size_t r = 0; r < labels.size(); ++r) {
          if (weights[r] == 0) continue;
          gp(r, labels[r]) -= g * weights[r] / (total * p(r, labels[r]));
        }
      });
}

template <typename Real>
Var<Real> SoftmaxCrossEntropy(Var<Real> logits, std::span<const int> gold,
                              std::span<const Real> mask) {
  const Real total = MaskTotal(gold, mask, logits.rows(), logits.cols());
  Matrix<Real> probs = SoftmaxRows(logits.value());
  const Matrix<Real> &z = logits.value();
  Real loss = 0;
  for (int r = 0; r < logits.rows(); ++r) {
    if (mask[r] == 0) continue;
    const Real max = z.row(r).maxCoeff();
    const Real lse = max + std::log((z.row(r).array() - max).exp().sum());
    loss += mask[r] * (lse - z(r, gold[r]));
  }
  Matrix<Real> value(1, 1);
  value(0, 0) = total > 0 ? loss / total : Real(0);
  std::vector<int> labels(gold.begin(), gold.end());
  std::vector<Real> weights(mask.begin(), mask.end());
  const int ia = logits.id();
  return logits.tape()->Record(
      "softmax_cross_entropy", std::move(value), {logits},
      [ia, labels, weights, total, probs = std::move(probs)](Tape<Real> &t, int self) {
        if (total <= 0) return;
        const Real g = t.grad(self)(0, 0);
        Matrix<Real> &gz = t.GradBuffer(ia);
        for (size_t r = 0; r < labels.size(); ++r) {
          if (weights[r] == 0) continue;
          const Real w = g * weights[r] / total;
          gz.row(r) += w * probs.row(r);
          gz(r, labels[r]) -= w;
        }
      });
}

#define ARGSTRUCT_INSTANTIATE_AUTOGRAD(Real)                                                  \
  template class ParameterStore<Real>;                                                        \
  template class Var<Real>;                                                                   \
  template class Tape<Real>;                                                                  \
  template Var<Real> MatMul(Var<Real>, Var<Real>);                                            \
  template Var<Real> Add(Var<Real>, Var<Real>);                                               \
  template Var<Real> AddBias(Var<Real>, Var<Real>);                                           \
  template Var<Real> Sub(Var<Real>, Var<Real>);                                               \
  template Var<Real> Mul(Var<Real>, Var<Real>);                                               \
  template Var<Real> Sigmoid(Var<Real>);                                                      \
  template Var<Real> Tanh(Var<Real>);                                                         \
  template Var<Real> Sum(Var<Real>);                                                          \
  template Var<Real> ConcatCols(std::span<const Var<Real>>);                                  \
  template Var<Real> StackRows(std::span<const Var<Real>>);                                   \
  template Var<Real> Slice(Var<Real>, int, int, int, int);                                    \
  template Var<Real> Gather(Var<Real>, std::span<const int>);                                 \
  template Var<Real> Dropout(Var<Real>, double, std::mt19937_64 *);                           \
  template Var<Real> Softmax(Var<Real>);                                                      \
  template Var<Real> CrossEntropy(Var<Real>, std::span<const int>, std::span<const Real>);    \
  template Var<Real> SoftmaxCrossEntropy(Var<Real>, std::span<const int>,                     \
                                         std::span<const Real>);                              \
  template Matrix<Real> SoftmaxRows(const Matrix<Real> &);

ARGSTRUCT_INSTANTIATE_AUTOGRAD(float)
ARGSTRUCT_INSTANTIATE_AUTOGRAD(double)

}  // namespace argstruct::ag
