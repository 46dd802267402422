// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vstg/numcore/layers.hpp"

namespace vstg {

/// Gated recurrent unit:
///   z  = sigmoid(x W_z + h U_z + b_z)
///   r  = sigmoid(x W_r + h U_r + b_r)
///   h~ = tanh(x W_h + (r * h) U_h + b_h)
///   h' = (1 - z) * h + z * h~
struct GruCellParams {
  Var w_z, w_r, w_h;  // d_x x d_h
  Var u_z, u_r, u_h;  // d_h x d_h
  Var b_z, b_r, b_h;  // 1 x d_h

  static GruCellParams init(std::size_t d_x, std::size_t d_h, Rng& rng);
  static GruCellParams zeros(std::size_t d_x, std::size_t d_h);
  std::size_t input_dim() const { return w_z.rows(); }
  std::size_t hidden_dim() const { return u_z.rows(); }
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
};

/// Linear target head d_h -> N.
struct ClassifierParams {
  Linear head;
};

Var gru_step(const GruCellParams& cell, const Var& x, const Var& h);

struct Anticipation {
  Var hidden;  // h_n, the anticipated target feature
  Var scores;  // 1 x N
  std::size_t iterations = 0;
};

/// Seeds the hidden state with `summary`, applies the cell n times with the
/// constant input `last_token`, and classifies the final hidden state.
/// Throws ProtocolError unless 1 <= n <= max_steps.
Anticipation anticipate(const GruCellParams& cell, const ClassifierParams& classifier, const Var& summary,
                        const Var& last_token, std::size_t n, std::size_t max_steps = 8);

}  // namespace vstg
