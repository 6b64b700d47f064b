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

#include "argstruct/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace argstruct::ag {

bool GradientCheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ParameterCheck &c) { return c.passed; });
}

std::vector<std::string> GradientCheckReport::FailedNames() const {
  std::vector<std::string> names;
  for (const ParameterCheck &c : checks) {
    if (!c.passed) names.push_back(c.name);
  }
  return names;
}

std::string GradientCheckReport::ToString() const {
  std::ostringstream out;
  out << std::scientific << std::setprecision(3);
  for (const ParameterCheck &c : checks) {
    out << (c.passed ? "ok   " : "FAIL ") << c.name << " elements=" << c.elements
        << " max_rel_error=" << c.max_rel_error;
    if (!c.passed) {
      out << " at " << c.worst_index << " (analytic " << c.analytic << ", numeric " << c.numeric
          << ")";
    }
    out << '\n';
  }
  return out.str();
}

double RelativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric) + 1e-8);
}

GradientCheckReport GradientCheck(const LossFn &loss_fn, ParameterStore<double> &params,
                                  double tolerance, double step) {
  GradientCheckReport report;
  report.tolerance = tolerance;
  params.ZeroGrad();
  {
    Tape<double> tape;
    tape.Backward(loss_fn(tape));
  }
  auto evaluate = [&]() {
    Tape<double> tape;
    return loss_fn(tape).value()(0, 0);
  };
  for (Parameter<double> &p : params) {
    ParameterCheck check;
    check.name = p.name;
    check.elements = p.value.size();
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double &x = p.value.data()[i];
      const double saved = x;
      x = saved + step;
      const double plus = evaluate();
      x = saved - step;
      const double minus = evaluate();
      x = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double analytic = p.grad.data()[i];
      const double err = RelativeError(analytic, numeric);
      if (err > check.max_rel_error || check.worst_index < 0) {
        check.max_rel_error = err;
        check.worst_index = i;
        check.analytic = analytic;
        check.numeric = numeric;
      }
    }
    check.passed = check.max_rel_error <= tolerance;
    report.checks.push_back(check);
  }
  return report;
}

namespace {

using Mat = Matrix<double>;

Mat RandomMatrix(std::mt19937_64 &rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Reduces an op output to a scalar through fixed random weights so every
// output element contributes a distinct gradient.
Var<double> Project(Var<double> y, const Mat &weights) {
  return Sum(Mul(y, y.tape()->Constant(weights)));
}

struct OpCase {
  std::string name;
  std::function<void(ParameterStore<double> &)> init;
  std::function<Var<double>(Tape<double> &, ParameterStore<double> &)> build;
};

ParameterCheck Collapse(const std::string &name, const GradientCheckReport &report) {
  ParameterCheck out;
  out.name = name;
  for (const ParameterCheck &c : report.checks) {
    out.elements += c.elements;
    if (c.max_rel_error >= out.max_rel_error) {
      out.max_rel_error = c.max_rel_error;
      out.worst_index = c.worst_index;
      out.analytic = c.analytic;
      out.numeric = c.numeric;
    }
  }
  out.passed = report.passed();
  return out;
}

}  // namespace

GradientCheckReport CheckOps(double tolerance, uint64_t seed, int max_dim) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, std::max(1, max_dim));
  const int n = dim(rng), m = dim(rng), k = dim(rng);
  const Mat w_nm = RandomMatrix(rng, n, m);
  const Mat w_nk = RandomMatrix(rng, n, k);
  const Mat w_1m = RandomMatrix(rng, 1, m);
  std::vector<int> gold(n);
  std::vector<double> mask(n);
  for (int r = 0; r < n; ++r) {
    gold[r] = static_cast<int>(rng() % m);
    mask[r] = (r == 0 || rng() % 4 != 0) ? 1.0 : 0.0;
  }
  std::vector<int> gather_ids(n);
  for (int r = 0; r < n; ++r) gather_ids[r] = static_cast<int>(rng() % m);

  auto two = [&](int r1, int c1, int r2, int c2) {
    return [&rng, r1, c1, r2, c2](ParameterStore<double> &p) {
      p.Add("a", r1, c1).value = RandomMatrix(rng, r1, c1);
      p.Add("b", r2, c2).value = RandomMatrix(rng, r2, c2);
    };
  };
  auto one = [&](int r1, int c1, double scale = 1.0) {
    return [&rng, r1, c1, scale](ParameterStore<double> &p) {
      p.Add("a", r1, c1).value = RandomMatrix(rng, r1, c1, scale);
    };
  };
  auto in = [](Tape<double> &t, ParameterStore<double> &p, const char *name) {
    return t.Param(p.Get(name));
  };

  std::vector<OpCase> cases = {
      {"matmul", two(n, k, k, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(MatMul(in(t, p, "a"), in(t, p, "b")), w_nm);
       }},
      {"add", two(n, m, n, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Add(in(t, p, "a"), in(t, p, "b")), w_nm);
       }},
      {"add_bias", two(n, m, 1, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(AddBias(in(t, p, "a"), in(t, p, "b")), w_nm);
       }},
      {"sub", two(n, m, n, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Sub(in(t, p, "a"), in(t, p, "b")), w_nm);
       }},
      {"mul", two(n, m, n, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Mul(in(t, p, "a"), in(t, p, "b")), w_nm);
       }},
      {"sigmoid", one(n, m, 3.0),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Sigmoid(in(t, p, "a")), w_nm);
       }},
      {"tanh", one(n, m, 2.0),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Tanh(in(t, p, "a")), w_nm);
       }},
      {"sum", one(n, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         Var<double> s = Sum(in(t, p, "a"));
         return Mul(s, s);
       }},
      {"concat", two(n, m, n, k),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         std::vector<Var<double>> parts = {in(t, p, "a"), in(t, p, "b")};
         Mat w(n, m + k);
         w << w_nm, w_nk;
         return Project(ConcatCols<double>(parts), w);
       }},
      {"stack_rows", two(n, m, 1, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         std::vector<Var<double>> parts = {in(t, p, "a"), in(t, p, "b")};
         Mat w(n + 1, m);
         w << w_nm, w_1m;
         return Project(StackRows<double>(parts), w);
       }},
      {"slice", one(n + 1, m + 1),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Slice(in(t, p, "a"), 1, n, 0, m), w_nm);
       }},
      {"gather", one(m, k),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Gather<double>(in(t, p, "a"), gather_ids), w_nk);
       }},
      {"dropout", one(n, m),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         std::mt19937_64 fixed(seed + 1);
         return Project(Dropout(in(t, p, "a"), 0.4, &fixed), w_nm);
       }},
      {"softmax", one(n, m, 2.0),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return Project(Softmax(in(t, p, "a")), w_nm);
       }},
      {"cross_entropy", one(n, m, 2.0),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return CrossEntropy<double>(Softmax(in(t, p, "a")), gold, mask);
       }},
      {"softmax_cross_entropy", one(n, m, 2.0),
       [&](Tape<double> &t, ParameterStore<double> &p) {
         return SoftmaxCrossEntropy<double>(in(t, p, "a"), gold, mask);
       }},
  };

  GradientCheckReport report;
  report.tolerance = tolerance;
  for (OpCase &op : cases) {
    ParameterStore<double> params;
    op.init(params);
    auto fn = [&](Tape<double> &t) { return op.build(t, params); };
    report.checks.push_back(Collapse(op.name, GradientCheck(fn, params, tolerance)));
  }
  return report;
}

}  // namespace argstruct::ag
