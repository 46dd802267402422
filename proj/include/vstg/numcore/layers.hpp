// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vstg/numcore/autograd.hpp"
#include "vstg/numcore/ops.hpp"
#include "vstg/numcore/rng.hpp"

namespace vstg {

/// Rounds every element to the nearest float. Parameters are kept
/// float-representable so they survive the 32-bit FeatureFile exactly.
void round_to_float(Tensor& t);

/// Glorot-uniform weight matrix, rounded to float.
Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// y = x W + b with W: in x out, b: 1 x out.
struct Linear {
  Var weight;
  Var bias;

  static Linear init(std::size_t in, std::size_t out, Rng& rng);
  static Linear zeros(std::size_t in, std::size_t out);

  Var operator()(const Var& x) const { return affine(x, weight, bias); }
  std::size_t in_features() const { return weight.rows(); }
  std::size_t out_features() const { return weight.cols(); }
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const {
    out.push_back({prefix + ".weight", weight});
    out.push_back({prefix + ".bias", bias});
  }
};

}  // namespace vstg
