// SPDX-License-Identifier: Apache-2.0
#include "vstg/numcore/layers.hpp"

#include <cmath>

namespace vstg {

void round_to_float(Tensor& t) {
  for (auto& v : t.storage()) v = static_cast<double>(static_cast<float>(v));
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w = rng.uniform_tensor(fan_in, fan_out, -limit, limit);
  round_to_float(w);
  return w;
}

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  return {Var::param(glorot(in, out, rng)), Var::param(Tensor::zeros(1, out))};
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
  return {Var::param(Tensor::zeros(in, out)), Var::param(Tensor::zeros(1, out))};
}

}  // namespace vstg
