// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "vstg/decoder.hpp"
#include "vstg/error.hpp"

using namespace vstg;
using vstg::testing::expect_tensor_near;

namespace {

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Gate-by-gate reference with explicit loops.
Tensor ref_step(const GruCellParams& c, const Tensor& x, const Tensor& h) {
  const std::size_t dx = x.cols(), dh = h.cols();
  auto gate = [&](const Var& w, const Var& u, const Var& b, const Tensor& hin, std::size_t j) {
    double acc = b.value()(0, j);
    for (std::size_t i = 0; i < dx; ++i) acc += x(0, i) * w.value()(i, j);
    for (std::size_t i = 0; i < dh; ++i) acc += hin(0, i) * u.value()(i, j);
    return acc;
  };
  Tensor z({1, dh}), r({1, dh}), rh({1, dh}), out({1, dh});
  for (std::size_t j = 0; j < dh; ++j) {
    z(0, j) = sig(gate(c.w_z, c.u_z, c.b_z, h, j));
    r(0, j) = sig(gate(c.w_r, c.u_r, c.b_r, h, j));
  }
  for (std::size_t j = 0; j < dh; ++j) rh(0, j) = r(0, j) * h(0, j);
  for (std::size_t j = 0; j < dh; ++j) {
    const double cand = std::tanh(gate(c.w_h, c.u_h, c.b_h, rh, j));
    out(0, j) = (1.0 - z(0, j)) * h(0, j) + z(0, j) * cand;
  }
  return out;
}

GruCellParams random_cell(std::size_t dx, std::size_t dh, Rng& rng) {
  auto c = GruCellParams::init(dx, dh, rng);
  for (Var* b : {&c.b_z, &c.b_r, &c.b_h}) b->mutable_value() = rng.normal_tensor(1, dh, 0.5);
  return c;
}

}  // namespace

TEST(GruStep, ZeroParamsHalveHidden) {
  const auto c = GruCellParams::zeros(3, 4);
  const Tensor h = Tensor::from_rows({{1.0, -2.0, 0.5, 8.0}});
  expect_tensor_near(gru_step(c, Var::constant(Tensor::from_rows({{5, 6, 7}})), Var::constant(h)).value(),
                     Tensor::from_rows({{0.5, -1.0, 0.25, 4.0}}), 1e-15);
}

TEST(GruStep, ZeroHiddenFixedPoint) {
  const auto c = GruCellParams::zeros(3, 4);
  const Tensor out = gru_step(c, Var::constant(Tensor::from_rows({{5, 6, 7}})), Var::constant(Tensor::zeros(1, 4))).value();
  for (double v : out.storage()) EXPECT_EQ(v, 0.0);
}

TEST(GruStep, MatchesGateOracle) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto c = random_cell(3, 3, rng);
    const Tensor x = rng.normal_tensor(1, 3), h = rng.normal_tensor(1, 3);
    expect_tensor_near(gru_step(c, Var::constant(x), Var::constant(h)).value(), ref_step(c, x, h), 1e-12);
  }
}

TEST(GruStep, ShapeMismatch) {
  const auto c = GruCellParams::zeros(3, 4);
  EXPECT_THROW(gru_step(c, Var::constant(Tensor::zeros(1, 4)), Var::constant(Tensor::zeros(1, 4))), ShapeError);
  EXPECT_THROW(gru_step(c, Var::constant(Tensor::zeros(1, 3)), Var::constant(Tensor::zeros(1, 3))), ShapeError);
}

TEST(Anticipate, ZeroCellClosedForm) {
  const auto c = GruCellParams::zeros(2, 3);
  const ClassifierParams cls{Linear::zeros(3, 5)};
  const Tensor v = Tensor::from_rows({{8.0, -4.0, 1.0}});
  const auto out = anticipate(c, cls, Var::constant(v), Var::constant(Tensor::from_rows({{1, 1}})), 3);
  expect_tensor_near(out.hidden.value(), Tensor::from_rows({{1.0, -0.5, 0.125}}), 1e-15);
  EXPECT_EQ(out.iterations, 3u);
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto o = anticipate(c, cls, Var::constant(v), Var::constant(Tensor::from_rows({{1, 1}})), n);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(o.hidden.value()(0, j), v(0, j) * std::pow(2.0, -double(n)), 1e-15);
  }
}

TEST(Anticipate, IterationCounterEqualsStep) {
  Rng rng(2);
  const auto c = random_cell(4, 4, rng);
  const ClassifierParams cls{Linear::init(4, 6, rng)};
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto out = anticipate(c, cls, Var::constant(rng.normal_tensor(1, 4)), Var::constant(rng.normal_tensor(1, 4)), n);
    EXPECT_EQ(out.iterations, n);
    EXPECT_EQ(out.scores.cols(), 6u);
  }
}

TEST(Anticipate, EightFoldUnrolledOracle) {
  Rng rng(3);
  const auto c = random_cell(5, 4, rng);
  const ClassifierParams cls{Linear::init(4, 7, rng)};
  const Tensor summary = rng.normal_tensor(1, 4), last = rng.normal_tensor(1, 5);
  Tensor h = summary;
  for (int i = 0; i < 8; ++i) h = ref_step(c, last, h);
  const auto out = anticipate(c, cls, Var::constant(summary), Var::constant(last), 8);
  expect_tensor_near(out.hidden.value(), h, 1e-12);
  Tensor scores = vstg::testing::naive_matmul(h, cls.head.weight.value());
  for (std::size_t j = 0; j < 7; ++j) scores(0, j) += cls.head.bias.value()(0, j);
  expect_tensor_near(out.scores.value(), scores, 1e-12);
}

TEST(Anticipate, StepOutOfRange) {
  const auto c = GruCellParams::zeros(2, 2);
  const ClassifierParams cls{Linear::zeros(2, 3)};
  const Var h = Var::constant(Tensor::zeros(1, 2));
  EXPECT_THROW(anticipate(c, cls, h, h, 0), ProtocolError);
  EXPECT_THROW(anticipate(c, cls, h, h, 9), ProtocolError);
  EXPECT_THROW(anticipate(c, cls, h, h, 5, 4), ProtocolError);
}

TEST(Anticipate, HiddenStaysBounded) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_cell(3, 5, rng);
    const Tensor x = rng.normal_tensor(1, 3, 10.0);
    Tensor h = rng.normal_tensor(1, 5, 3.0);
    for (int i = 0; i < 8; ++i) {
      double before = 0.0, after = 0.0;
      for (double v : h.storage()) before = std::max(before, std::abs(v));
      h = gru_step(c, Var::constant(x), Var::constant(h)).value();
      for (double v : h.storage()) after = std::max(after, std::abs(v));
      EXPECT_LE(after, std::max(before, 1.0) + 1e-12);
    }
  }
}

TEST(Anticipate, GradCheckAtOneAndEight) {
  Rng rng(5);
  for (std::size_t n : {1u, 8u}) {
    const auto c = random_cell(3, 4, rng);
    const ClassifierParams cls{Linear::init(4, 5, rng)};
    Var summary = Var::param(rng.normal_tensor(1, 4));
    Var last = Var::param(rng.normal_tensor(1, 3));
    const Var probe = Var::constant(rng.normal_tensor(5, 1));
    std::vector<NamedParam> params{{"summary", summary}, {"last", last}};
    c.collect("gru", params);
    cls.head.collect("classifier", params);
    SCOPED_TRACE("n=" + std::to_string(n));
    vstg::testing::expect_grad_ok(
        [&] { return sum(matmul(anticipate(c, cls, summary, last, n).scores, probe)); }, params);
    // Every parameter group receives gradient.
    for (auto& p : params) p.var.zero_grad();
    sum(matmul(anticipate(c, cls, summary, last, n).scores, probe)).backward();
    for (const auto& p : params) {
      const Tensor g = p.var.grad();
      double mag = 0.0;
      for (double v : g.storage()) mag += std::abs(v);
      EXPECT_GT(mag, 0.0) << p.name;
    }
  }
}
