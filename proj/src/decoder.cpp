// SPDX-License-Identifier: Apache-2.0
#include "vstg/decoder.hpp"

#include "vstg/error.hpp"

namespace vstg {
namespace {

struct InputGates {
  Var z, r, h;  // x W + b, shared across iterations
};

InputGates input_gates(const GruCellParams& c, const Var& x) {
  return {affine(x, c.w_z, c.b_z), affine(x, c.w_r, c.b_r), affine(x, c.w_h, c.b_h)};
}

Var step_with(const GruCellParams& c, const InputGates& in, const Var& h) {
  const Var z = sigmoid(add(in.z, matmul(h, c.u_z)));
  const Var r = sigmoid(add(in.r, matmul(h, c.u_r)));
  const Var candidate = tanh(add(in.h, matmul(mul(r, h), c.u_h)));
  // (1 - z) * h + z * h~  ==  h + z * (h~ - h)
  return add(h, mul(z, sub(candidate, h)));
}

void check_shapes(const GruCellParams& c, const Var& x, const Var& h) {
  if (x.rows() != 1 || x.cols() != c.input_dim() || h.rows() != 1 || h.cols() != c.hidden_dim()) {
    throw ShapeError("gru_step: input " + shape_str(x.shape()) + " / hidden " + shape_str(h.shape()) +
                     " do not match cell [" + std::to_string(c.input_dim()) + " -> " + std::to_string(c.hidden_dim()) + "]");
  }
}

}  // namespace

GruCellParams GruCellParams::init(std::size_t d_x, std::size_t d_h, Rng& rng) {
  GruCellParams c;
  c.w_z = Var::param(glorot(d_x, d_h, rng));
  c.w_r = Var::param(glorot(d_x, d_h, rng));
  c.w_h = Var::param(glorot(d_x, d_h, rng));
  c.u_z = Var::param(glorot(d_h, d_h, rng));
  c.u_r = Var::param(glorot(d_h, d_h, rng));
  c.u_h = Var::param(glorot(d_h, d_h, rng));
  c.b_z = Var::param(Tensor::zeros(1, d_h));
  c.b_r = Var::param(Tensor::zeros(1, d_h));
  c.b_h = Var::param(Tensor::zeros(1, d_h));
  return c;
}

GruCellParams GruCellParams::zeros(std::size_t d_x, std::size_t d_h) {
  GruCellParams c;
  for (Var* w : {&c.w_z, &c.w_r, &c.w_h}) *w = Var::param(Tensor::zeros(d_x, d_h));
  for (Var* u : {&c.u_z, &c.u_r, &c.u_h}) *u = Var::param(Tensor::zeros(d_h, d_h));
  for (Var* b : {&c.b_z, &c.b_r, &c.b_h}) *b = Var::param(Tensor::zeros(1, d_h));
  return c;
}

void GruCellParams::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".w_z", w_z});
  out.push_back({prefix + ".w_r", w_r});
  out.push_back({prefix + ".w_h", w_h});
  out.push_back({prefix + ".u_z", u_z});
  out.push_back({prefix + ".u_r", u_r});
  out.push_back({prefix + ".u_h", u_h});
  out.push_back({prefix + ".b_z", b_z});
  out.push_back({prefix + ".b_r", b_r});
  out.push_back({prefix + ".b_h", b_h});
}

Var gru_step(const GruCellParams& cell, const Var& x, const Var& h) {
  check_shapes(cell, x, h);
  return step_with(cell, input_gates(cell, x), h);
}

Anticipation anticipate(const GruCellParams& cell, const ClassifierParams& classifier, const Var& summary,
                        const Var& last_token, std::size_t n, std::size_t max_steps) {
  if (n < 1 || n > max_steps) {
    throw ProtocolError("anticipation step " + std::to_string(n) + " outside [1, " + std::to_string(max_steps) + "]");
  }
  check_shapes(cell, last_token, summary);
  const InputGates in = input_gates(cell, last_token);
  Anticipation out;
  Var h = summary;
  for (std::size_t i = 0; i < n; ++i) {
    h = step_with(cell, in, h);
    ++out.iterations;
  }
  out.hidden = h;
  out.scores = classifier.head(h);
  return out;
}

}  // namespace vstg
