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
#include <random>
#include <string>
#include <vector>

#include "argstruct/error.h"
#include "argstruct/gradcheck.h"
#include "doctest.h"
#include "test_util.h"

namespace argstruct::nn {
namespace {

using MatD = Matrix<double>;
using Vec = std::vector<double>;

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Element-by-element GRU step read straight from the parameter matrices.
Vec ScalarGruStep(const ParameterStore<double> &params, const std::string &prefix, const Vec &x,
                  const Vec &h) {
  const MatD &w = params.Get(prefix + "/W").value;
  const MatD &u = params.Get(prefix + "/U_zr").value;
  const MatD &uh = params.Get(prefix + "/U_h").value;
  const MatD &b = params.Get(prefix + "/b").value;
  const int n = static_cast<int>(h.size());
  Vec z(n), r(n), out(n);
  for (int j = 0; j < n; ++j) {
    double az = b(0, j), ar = b(0, n + j);
    for (size_t i = 0; i < x.size(); ++i) {
      az += x[i] * w(i, j);
      ar += x[i] * w(i, n + j);
    }
    for (int k = 0; k < n; ++k) {
      az += h[k] * u(k, j);
      ar += h[k] * u(k, n + j);
    }
    z[j] = Sigmoid(az);
    r[j] = Sigmoid(ar);
  }
  for (int j = 0; j < n; ++j) {
    double ac = b(0, 2 * n + j);
    for (size_t i = 0; i < x.size(); ++i) ac += x[i] * w(i, 2 * n + j);
    for (int k = 0; k < n; ++k) ac += r[k] * h[k] * uh(k, j);
    out[j] = (1.0 - z[j]) * h[j] + z[j] * std::tanh(ac);
  }
  return out;
}

// Reference stack over one sequence (no batching, no dropout).
std::vector<Vec> ScalarStack(const ParameterStore<double> &params, const std::string &prefix,
                             std::vector<Vec> seq, const StackConfig &config) {
  const int steps = static_cast<int>(seq.size());
  for (int l = 1; l <= config.layers; ++l) {
    const std::string cell = prefix + "/gru" + std::to_string(l);
    std::vector<Vec> out(steps);
    Vec h(config.hidden_dim, 0.0);
    for (int k = 0; k < steps; ++k) {
      const int t = l % 2 == 1 ? k : steps - 1 - k;
      h = ScalarGruStep(params, cell, seq[t], h);
      out[t] = h;
    }
    if (config.residual && l >= 2 && seq[0].size() == out[0].size()) {
      for (int t = 0; t < steps; ++t) {
        for (size_t j = 0; j < out[t].size(); ++j) out[t][j] += seq[t][j];
      }
    }
    seq = out;
  }
  return seq;
}

void Randomize(ParameterStore<double> &params, std::mt19937_64 &rng, double scale = 0.8) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Parameter<double> &p : params) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = u(rng);
  }
}

MatD RandomInputs(int rows, int cols, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  MatD m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

TEST_CASE("zero cell keeps a zero state") {
  ParameterStore<double> params;
  AddGruParams(params, "g", 3, 4);
  for (Parameter<double> &p : params) p.value.setZero();
  Tape<double> tape;
  const GruVars<double> cell = BindGru(tape, params, "g");
  const Var<double> h =
      GruStep(cell, tape.Constant(MatD::Random(1, 3)), tape.Constant(MatD::Zero(1, 4)));
  CHECK(h.value().isZero());
}

TEST_CASE("closed update gate carries the previous state") {
  std::mt19937_64 rng(1);
  ParameterStore<double> params;
  AddGruParams(params, "g", 3, 4);
  Randomize(params, rng);
  params.Get("g/b").value.leftCols(4).setConstant(-40.0);
  Tape<double> tape;
  const GruVars<double> cell = BindGru(tape, params, "g");
  const MatD h_prev = RandomInputs(2, 4, rng) * 0.9;
  const Var<double> h = GruStep(cell, tape.Constant(RandomInputs(2, 3, rng)), tape.Constant(h_prev));
  CHECK((h.value() - h_prev).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("gru step matches the scalar reference") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 1 + static_cast<int>(rng() % 7), hidden = 1 + static_cast<int>(rng() % 6);
    ParameterStore<double> params;
    AddGruParams(params, "g", in, hidden);
    Randomize(params, rng);
    const MatD x = RandomInputs(3, in, rng);
    const MatD h_prev = RandomInputs(3, hidden, rng) * 0.99;
    Tape<double> tape;
    const Var<double> h =
        GruStep(BindGru(tape, params, "g"), tape.Constant(x), tape.Constant(h_prev));
    for (int b = 0; b < 3; ++b) {
      const Vec xs(x.row(b).data(), x.row(b).data() + in);
      const Vec hs(h_prev.row(b).data(), h_prev.row(b).data() + hidden);
      const Vec expected = ScalarGruStep(params, "g", xs, hs);
      for (int j = 0; j < hidden; ++j) {
        CHECK(std::abs(h.value()(b, j) - expected[j]) <= 1e-6);
        CHECK(std::abs(h.value()(b, j)) < 1.0);
      }
    }
  }
}

TEST_CASE("gru step rejects mismatched shapes") {
  ParameterStore<double> params;
  AddGruParams(params, "g", 3, 4);
  Tape<double> tape;
  const GruVars<double> cell = BindGru(tape, params, "g");
  CHECK_THROWS_AS(GruStep(cell, tape.Constant(MatD::Zero(1, 2)), tape.Constant(MatD::Zero(1, 4))),
                  ShapeError);
  CHECK_THROWS_AS(GruStep(cell, tape.Constant(MatD::Zero(1, 3)), tape.Constant(MatD::Zero(1, 3))),
                  ShapeError);
}

TEST_CASE("stack matches the scalar reference for several depths") {
  std::mt19937_64 rng(3);
  for (int layers = 1; layers <= 4; ++layers) {
    for (bool residual : {true, false}) {
      CAPTURE(layers);
      CAPTURE(residual);
      const StackConfig config{layers, 5, residual, 0.0};
      ParameterStore<double> params;
      AddStackParams(params, "s", 4, config);
      Randomize(params, rng, 0.6);
      const int steps = 6, batch = 2;
      const MatD x = RandomInputs(steps * batch, 4, rng);
      Tape<double> tape;
      const MatD out =
          StackedBiGru(tape, params, "s", tape.Constant(x), steps, batch, config, {}, nullptr)
              .value();
      CHECK(out.rows() == steps * batch);
      CHECK(out.cols() == 5);
      for (int b = 0; b < batch; ++b) {
        std::vector<Vec> seq;
        for (int t = 0; t < steps; ++t) {
          seq.emplace_back(x.row(t * batch + b).data(), x.row(t * batch + b).data() + 4);
        }
        const std::vector<Vec> expected = ScalarStack(params, "s", seq, config);
        for (int t = 0; t < steps; ++t) {
          for (int j = 0; j < 5; ++j) {
            CHECK(std::abs(out(t * batch + b, j) - expected[t][j]) <= 1e-6);
          }
        }
      }
    }
  }
}

TEST_CASE("one-layer stack is a plain left-to-right layer") {
  std::mt19937_64 rng(4);
  const StackConfig config{1, 3, true, 0.0};
  ParameterStore<double> params;
  AddStackParams(params, "s", 2, config);
  Randomize(params, rng);
  const MatD x = RandomInputs(5, 2, rng);
  Tape<double> tape;
  const MatD stacked =
      StackedBiGru(tape, params, "s", tape.Constant(x), 5, 1, config, {}, nullptr).value();
  const MatD layer = GruLayer(BindGru(tape, params, "s/gru1"), tape.Constant(x), 5, 1,
                              Direction::kLeftToRight, {})
                         .value();
  CHECK(stacked == layer);
  Var<double> h = tape.Constant(MatD::Zero(1, 3));
  const GruVars<double> cell = BindGru(tape, params, "s/gru1");
  for (int t = 0; t < 5; ++t) {
    h = GruStep(cell, tape.Constant(MatD(x.row(t))), h);
    CHECK((h.value() - stacked.row(t)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("direction does not matter for a single step") {
  std::mt19937_64 rng(5);
  ParameterStore<double> params;
  AddGruParams(params, "g", 3, 3);
  Randomize(params, rng);
  const MatD x = RandomInputs(2, 3, rng);
  Tape<double> tape;
  const GruVars<double> cell = BindGru(tape, params, "g");
  CHECK(GruLayer(cell, tape.Constant(x), 1, 2, Direction::kLeftToRight, {}).value() ==
        GruLayer(cell, tape.Constant(x), 1, 2, Direction::kRightToLeft, {}).value());
}

TEST_CASE("right-to-left on a sequence equals reversed left-to-right on its reverse") {
  std::mt19937_64 rng(6);
  ParameterStore<double> params;
  AddGruParams(params, "g", 3, 4);
  Randomize(params, rng);
  const int steps = 7;
  const MatD x = RandomInputs(steps, 3, rng);
  const MatD reversed = x.colwise().reverse();
  Tape<double> tape;
  const GruVars<double> cell = BindGru(tape, params, "g");
  const MatD backward = GruLayer(cell, tape.Constant(x), steps, 1, Direction::kRightToLeft, {}).value();
  const MatD forward_rev =
      GruLayer(cell, tape.Constant(reversed), steps, 1, Direction::kLeftToRight, {}).value();
  CHECK((backward - MatD(forward_rev.colwise().reverse())).cwiseAbs().maxCoeff() <= 1e-12);
  const MatD forward = GruLayer(cell, tape.Constant(x), steps, 1, Direction::kLeftToRight, {}).value();
  CHECK((forward - backward).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("masked steps carry the state and match the unpadded run") {
  std::mt19937_64 rng(7);
  const StackConfig config{3, 4, true, 0.0};
  ParameterStore<double> params;
  AddStackParams(params, "s", 3, config);
  Randomize(params, rng);
  const int steps = 5, batch = 2, short_len = 3;
  const MatD x = RandomInputs(steps * batch, 3, rng);
  Tape<double> tape;
  std::vector<Var<double>> masks;
  for (int t = 0; t < steps; ++t) {
    MatD m = MatD::Ones(batch, 4);
    if (t >= short_len) m.row(1).setZero();
    masks.push_back(tape.Constant(m));
  }
  const MatD padded =
      StackedBiGru(tape, params, "s", tape.Constant(x), steps, batch, config, masks, nullptr).value();
  MatD alone(short_len, 3);
  for (int t = 0; t < short_len; ++t) alone.row(t) = x.row(t * batch + 1);
  const MatD single =
      StackedBiGru(tape, params, "s", tape.Constant(alone), short_len, 1, config, {}, nullptr)
          .value();
  for (int t = 0; t < short_len; ++t) {
    CHECK((padded.row(t * batch + 1) - single.row(t)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("residual connections change values but not shapes") {
  std::mt19937_64 rng(8);
  StackConfig with{3, 4, true, 0.0};
  StackConfig without{3, 4, false, 0.0};
  ParameterStore<double> params;
  AddStackParams(params, "s", 6, with);
  Randomize(params, rng);
  const MatD x = RandomInputs(8, 6, rng);
  Tape<double> tape;
  const MatD a = StackedBiGru(tape, params, "s", tape.Constant(x), 4, 2, with, {}, nullptr).value();
  const MatD b =
      StackedBiGru(tape, params, "s", tape.Constant(x), 4, 2, without, {}, nullptr).value();
  CHECK(a.rows() == b.rows());
  CHECK(a.cols() == b.cols());
  CHECK((a - b).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("stack is deterministic without dropout and seeded with it") {
  std::mt19937_64 rng(9);
  StackConfig config{2, 4, true, 0.4};
  ParameterStore<double> params;
  AddStackParams(params, "s", 4, config);
  Randomize(params, rng);
  const MatD x = RandomInputs(6, 4, rng);
  Tape<double> tape;
  const MatD a = StackedBiGru(tape, params, "s", tape.Constant(x), 3, 2, config, {}, nullptr).value();
  const MatD b = StackedBiGru(tape, params, "s", tape.Constant(x), 3, 2, config, {}, nullptr).value();
  CHECK(a == b);
  std::mt19937_64 r1(5), r2(5);
  const MatD c = StackedBiGru(tape, params, "s", tape.Constant(x), 3, 2, config, {}, &r1).value();
  const MatD d = StackedBiGru(tape, params, "s", tape.Constant(x), 3, 2, config, {}, &r2).value();
  CHECK(c == d);
  CHECK(c != a);
}

TEST_CASE("full stack passes the gradient check") {
  std::mt19937_64 rng(10);
  const StackConfig config{3, 3, true, 0.0};
  ParameterStore<double> params;
  AddStackParams(params, "s", 2, config);
  Randomize(params, rng);
  params.Add("x", 8, 2).value = RandomInputs(8, 2, rng);
  const MatD proj = RandomInputs(8, 3, rng);
  const ag::LossFn loss = [&](Tape<double> &t) {
    const Var<double> out =
        StackedBiGru(t, params, "s", t.Param(params.Get("x")), 4, 2, config, {}, nullptr);
    return ag::Sum(ag::Mul(out, t.Constant(proj)));
  };
  const ag::GradientCheckReport report = ag::GradientCheck(loss, params, 1e-4);
  CAPTURE(report.ToString());
  CHECK(report.passed());
}

TEST_CASE("output head") {
  Tape<double> tape;
  const Var<double> hidden = tape.Constant(MatD::Random(3, 300));
  const Var<double> zero_w = tape.Constant(MatD::Zero(300, 4));
  const Var<double> logits = OutputHead(zero_w, tape.Constant(MatD::Zero(1, 4)), hidden);
  CHECK(logits.cols() == 4);
  CHECK(logits.rows() == 3);
  const MatD uniform = ag::SoftmaxRows<double>(logits.value());
  CHECK((uniform.array() - 0.25).abs().maxCoeff() < 1e-12);
  MatD bias = MatD::Zero(1, 4);
  bias(0, 0) = 10.0;
  const MatD p = ag::SoftmaxRows<double>(OutputHead(zero_w, tape.Constant(bias), hidden).value());
  for (int r = 0; r < 3; ++r) {
    Eigen::Index arg;
    p.row(r).maxCoeff(&arg);
    CHECK(arg == 0);
  }
  CHECK_THROWS_AS(OutputHead(tape.Constant(MatD::Zero(5, 4)), tape.Constant(MatD::Zero(1, 4)), hidden),
                  ShapeError);
}

TEST_CASE("initializers") {
  std::mt19937_64 rng(11);
  Parameter<float> emb{"emb", Matrix<float>(200, 16), {}};
  InitUniform(emb, 0.25, rng);
  CHECK(emb.value.maxCoeff() <= 0.25f);
  CHECK(emb.value.minCoeff() >= -0.25f);
  CHECK(emb.value.maxCoeff() > 0.2f);
  Parameter<float> w{"w", Matrix<float>(10, 30), {}};
  InitGlorot(w, 10, rng);
  CHECK(w.value.cwiseAbs().maxCoeff() <= std::sqrt(6.0f / 20.0f));
}

TEST_CASE("pretrained embeddings") {
  const Vocabulary vocab = Vocabulary::Parse("0\t<UNK>\t0\n1\t<PAD>\t0\n2\ta\t3\n3\tb\t2\n");
  testing::TempDir dir("emb");
  {
    std::ofstream out(dir.file("ok.txt"));
    out << "a 1 2 3\nzzz 4 5 6\nb 7 8 9\n";
    std::ofstream bad(dir.file("bad.txt"));
    bad << "a 1 2\n";
  }
  Parameter<float> table{"t", Matrix<float>::Zero(4, 3), {}};
  CHECK(LoadPretrainedEmbeddings(dir.file("ok.txt"), vocab, table) == 2);
  CHECK(table.value(2, 1) == 2.0f);
  CHECK(table.value(3, 2) == 9.0f);
  CHECK(table.value.row(0).isZero());
  CHECK_THROWS_AS(LoadPretrainedEmbeddings(dir.file("bad.txt"), vocab, table), Error);
}

}  // namespace
}  // namespace argstruct::nn
