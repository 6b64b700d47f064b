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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "argstruct/error.h"
#include "argstruct/gradcheck.h"
#include "doctest.h"

namespace argstruct::ag {
namespace {

using MatD = Matrix<double>;

MatD Row(std::initializer_list<double> values) {
  MatD m(1, static_cast<int>(values.size()));
  int i = 0;
  for (double v : values) m(0, i++) = v;
  return m;
}

TEST_CASE("softmax of equal logits is uniform") {
  const MatD p = SoftmaxRows<double>(Row({0, 0, 0, 0}));
  for (int j = 0; j < 4; ++j) CHECK(p(0, j) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax is stable for large logits") {
  const MatD p = SoftmaxRows<double>(Row({1000, 0, 0, 0}));
  CHECK(std::isfinite(p(0, 0)));
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p(0, 1) >= 0.0);
  CHECK(p(0, 1) < 1e-300);
  const Matrix<float> q = SoftmaxRows<float>(Matrix<float>::Constant(1, 4, 1e30f));
  CHECK(q.allFinite());
}

TEST_CASE("softmax rows are shift-invariant distributions") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    MatD x(5, 4);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    const MatD p = SoftmaxRows<double>(x);
    const MatD q = SoftmaxRows<double>((x.array() + normal(rng) * 10).matrix());
    for (int r = 0; r < 5; ++r) {
      CHECK(std::abs(p.row(r).sum() - 1.0) <= 1e-6);
      CHECK((p.row(r).array() > 0).all());
    }
    CHECK((p - q).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("cross entropy values") {
  Tape<double> tape;
  const std::vector<int> gold0{0};
  const std::vector<double> mask{1.0};
  MatD one_hot = Row({1, 0, 0, 0});
  CHECK(CrossEntropy(tape.Constant(one_hot), std::span<const int>(gold0), std::span<const double>(mask))
            .value()(0, 0) == doctest::Approx(0.0));
  for (int g = 0; g < 4; ++g) {
    const std::vector<int> gold{g};
    const Var<double> loss = CrossEntropy(tape.Constant(Row({.25, .25, .25, .25})),
                                          std::span<const int>(gold), std::span<const double>(mask));
    CHECK(loss.value()(0, 0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(loss.value()(0, 0) == doctest::Approx(1.3863).epsilon(1e-4));
  }
  const std::vector<int> bad{4};
  CHECK_THROWS_AS(CrossEntropy(tape.Constant(one_hot), std::span<const int>(bad), std::span<const double>(mask)),
                  Error);
}

TEST_CASE("cross entropy matches direct log-probabilities") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    MatD logits(6, 4);
    for (int i = 0; i < logits.size(); ++i) logits.data()[i] = normal(rng);
    std::vector<int> gold(6);
    std::vector<double> mask(6);
    for (int r = 0; r < 6; ++r) {
      gold[r] = static_cast<int>(rng() % 4);
      mask[r] = r == 0 || rng() % 3 ? 1.0 : 0.0;
    }
    double expected = 0.0;
    double count = 0.0;
    for (int r = 0; r < 6; ++r) {
      if (mask[r] == 0.0) continue;
      double z = 0.0;
      for (int j = 0; j < 4; ++j) z += std::exp(logits(r, j));
      expected += std::log(z) - logits(r, gold[r]);
      count += 1.0;
    }
    expected /= count;
    Tape<double> tape;
    const double fused =
        SoftmaxCrossEntropy(tape.Constant(logits), std::span<const int>(gold), std::span<const double>(mask))
            .value()(0, 0);
    const double separate = CrossEntropy(Softmax(tape.Constant(logits)),
                                         std::span<const int>(gold), std::span<const double>(mask))
                                .value()(0, 0);
    CHECK(std::abs(fused - expected) <= 1e-12);
    CHECK(std::abs(separate - expected) <= 1e-12);
  }
}

TEST_CASE("softmax cross entropy gradient on uniform logits matches finite differences") {
  for (int g = 0; g < 4; ++g) {
    ParameterStore<double> params;
    params.Add("x", 1, 4).value.setZero();
    const std::vector<int> gold{g};
    const std::vector<double> mask{1.0};
    const LossFn loss = [&](Tape<double> &t) {
      return CrossEntropy(Softmax(t.Param(params.Get("x"))), std::span<const int>(gold),
                          std::span<const double>(mask));
    };
    const GradientCheckReport report = GradientCheck(loss, params, 1e-6);
    CHECK(report.passed());
    Tape<double> tape;
    params.ZeroGrad();
    tape.Backward(loss(tape));
    for (int j = 0; j < 4; ++j) {
      CHECK(params.Get("x").grad(0, j) == doctest::Approx(0.25 - (j == g)).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward on simple graphs") {
  ParameterStore<double> params;
  Parameter<double> &theta = params.Add("theta", 2, 3);
  theta.value.setRandom();
  Parameter<double> &unused = params.Add("unused", 1, 1);
  params.ZeroGrad();

  SUBCASE("sum gives ones") {
    Tape<double> tape;
    tape.Backward(Sum(tape.Param(theta)));
    CHECK(theta.grad.isApprox(MatD::Ones(2, 3)));
    CHECK(unused.grad(0, 0) == 0.0);
  }
  SUBCASE("square at three gives six") {
    Parameter<double> &s = params.Add("s", 1, 1);
    s.value(0, 0) = 3.0;
    s.grad.setZero();
    Tape<double> tape;
    const Var<double> v = tape.Param(s);
    tape.Backward(Sum(Mul(v, v)));
    CHECK(s.grad(0, 0) == doctest::Approx(6.0));
  }
  SUBCASE("diamond fan-out accumulates") {
    // y = sum(tanh(a) * a + sigmoid(a)): both branches reach a.
    Tape<double> tape;
    const Var<double> a = tape.Param(theta);
    tape.Backward(Sum(Add(Mul(Tanh(a), a), Sigmoid(a))));
    for (int i = 0; i < theta.value.size(); ++i) {
      const double x = theta.value.data()[i];
      const double th = std::tanh(x);
      const double sg = 1.0 / (1.0 + std::exp(-x));
      const double expected = (1 - th * th) * x + th + sg * (1 - sg);
      CHECK(theta.grad.data()[i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("addition distributes") {
    Tape<double> tape;
    const Var<double> a = tape.Param(theta);
    const Var<double> b = tape.Input(MatD::Random(2, 3));
    tape.Backward(Sum(Add(Mul(a, b), a)));
    CHECK(theta.grad.isApprox((b.value().array() + 1.0).matrix()));
    CHECK(b.grad().isApprox(theta.value));
  }
  SUBCASE("non-scalar loss is rejected") {
    Tape<double> tape;
    CHECK_THROWS_AS(tape.Backward(Tanh(tape.Param(theta))), ShapeError);
  }
  SUBCASE("backward is deterministic") {
    MatD first;
    for (int run = 0; run < 2; ++run) {
      params.ZeroGrad();
      Tape<double> tape;
      const Var<double> a = tape.Param(theta);
      const Var<double> w = tape.Constant(MatD::Ones(3, 4));
      tape.Backward(Sum(Softmax(MatMul(Tanh(a), w))));
      if (run == 0) {
        first = theta.grad;
      } else {
        CHECK(theta.grad == first);
      }
    }
  }
}

TEST_CASE("shape errors") {
  Tape<double> tape;
  const Var<double> a = tape.Constant(MatD::Zero(2, 3));
  const Var<double> b = tape.Constant(MatD::Zero(2, 2));
  CHECK_THROWS_AS(Add(a, b), ShapeError);
  CHECK_THROWS_AS(MatMul(a, a), ShapeError);
  const std::vector<int> ids{5};
  CHECK_THROWS_AS(Gather(a, std::span<const int>(ids)), ShapeError);
}

TEST_CASE("gather scatters only into looked-up rows") {
  ParameterStore<double> params;
  Parameter<double> &table = params.Add("table", 5, 2);
  table.value.setRandom();
  params.ZeroGrad();
  const std::vector<int> ids{3, 1, 3};
  Tape<double> tape;
  const Var<double> rows = Gather(tape.Param(table), std::span<const int>(ids));
  CHECK(rows.value().row(0) == table.value.row(3));
  tape.Backward(Sum(rows));
  CHECK(table.grad.row(3) == MatD::Constant(1, 2, 2.0));
  CHECK(table.grad.row(1) == MatD::Constant(1, 2, 1.0));
  CHECK(table.grad.row(0).isZero());
  CHECK(table.grad.row(2).isZero());
  CHECK(table.grad.row(4).isZero());
}

TEST_CASE("linear softmax toy passes a strict gradient check") {
  std::mt19937_64 rng(4);
  ParameterStore<double> params;
  params.Add("W", 3, 4).value.setRandom();
  params.Add("b", 1, 4).value.setRandom();
  const MatD x = MatD::Random(5, 3);
  const std::vector<int> gold{0, 3, 2, 1, 1};
  const std::vector<double> mask(5, 1.0);
  const LossFn loss = [&](Tape<double> &t) {
    const Var<double> logits =
        AddBias(MatMul(t.Constant(x), t.Param(params.Get("W"))), t.Param(params.Get("b")));
    return CrossEntropy(Softmax(logits), std::span<const int>(gold), std::span<const double>(mask));
  };
  const GradientCheckReport report = GradientCheck(loss, params, 1e-6);
  CHECK(report.passed());
  CHECK(report.checks.size() == 2);
}

TEST_CASE("relative error formula") {
  CHECK(RelativeError(1.0, 1.0) == 0.0);
  CHECK(RelativeError(0.0, 0.0) == 0.0);
  CHECK(RelativeError(1.0, 0.0) == doctest::Approx(1.0 / (1.0 + 1e-8)));
}

TEST_CASE("every op passes the finite-difference check on shapes up to 64") {
  for (uint64_t seed : {7u, 8u, 9u}) {
    const GradientCheckReport report = CheckOps(1e-4, seed, 64);
    CAPTURE(report.ToString());
    CHECK(report.passed());
    CHECK(report.checks.size() >= 16);
  }
}

TEST_CASE("a corrupted backward is caught and named") {
  for (const char *op : {"tanh", "matmul", "softmax"}) {
    SetFaultInjection(op);
    const GradientCheckReport report = CheckOps();
    SetFaultInjection("");
    CHECK_FALSE(report.passed());
    const std::vector<std::string> failed = report.FailedNames();
    REQUIRE(failed.size() >= 1);
    CHECK(std::find(failed.begin(), failed.end(), op) != failed.end());
    CHECK(report.ToString().find(op) != std::string::npos);
  }
  CHECK(CheckOps().passed());
}

TEST_CASE("inverted dropout keeps the expectation") {
  std::mt19937_64 rng(6);
  const int n = 100000;
  for (double rate : {0.1, 0.4, 0.7}) {
    Tape<double> tape;
    const Var<double> x = tape.Constant(MatD::Constant(1, n, 2.0));
    const MatD y = Dropout(x, rate, &rng).value();
    const double mean = y.mean();
    CHECK(std::abs(mean - 2.0) / 2.0 <= 0.01);
    const double zeros = (y.array() == 0.0).cast<double>().mean();
    CHECK(zeros == doctest::Approx(rate).epsilon(0.05));
  }
}

TEST_CASE("dropout is the identity in evaluation mode") {
  Tape<double> tape;
  const MatD value = MatD::Random(4, 7);
  const Var<double> x = tape.Constant(value);
  CHECK(Dropout(x, 0.4, nullptr).value() == value);
  std::mt19937_64 rng(1);
  CHECK(Dropout(x, 0.0, &rng).value() == value);
  CHECK_THROWS_AS(Dropout(x, 1.0, &rng), Error);
}

TEST_CASE("concat, stack and slice") {
  Tape<double> tape;
  const Var<double> a = tape.Constant(MatD::Constant(2, 1, 1.0));
  const Var<double> b = tape.Constant(MatD::Constant(2, 2, 2.0));
  const std::vector<Var<double>> parts{a, b};
  const Var<double> c = ConcatCols<double>(parts);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 3);
  CHECK(c.value()(1, 2) == 2.0);
  const std::vector<Var<double>> rows{c, c};
  const Var<double> s = StackRows<double>(rows);
  CHECK(s.rows() == 4);
  const Var<double> sl = Slice(s, 1, 2, 0, 1);
  CHECK(sl.value() == MatD::Constant(2, 1, 1.0));
}

}  // namespace
}  // namespace argstruct::ag
