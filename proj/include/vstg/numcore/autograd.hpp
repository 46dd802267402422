// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vstg/numcore/tensor.hpp"

namespace vstg {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One vertex of the reverse-mode graph. `backward` reads `grad` and
/// accumulates into the parents' `grad`.
struct Node {
  Tensor value;
  Tensor grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;

  Tensor& grad_buffer();
  void accumulate(const Tensor& g);
};

/// Handle to a graph node. Copying a Var shares the node.
///
/// Leaves created with `Var::param` persist across forward passes and
/// accumulate gradients until `zero_grad()`. Every op result holds its
/// parents alive, so a graph lives exactly as long as its root handle.
/// The graph is single-threaded: never run backward on two graphs that
/// share leaves from different threads.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  static Var constant(Tensor value) { return Var(std::move(value), false); }
  static Var param(Tensor value) { return Var(std::move(value), true); }

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  /// Direct access for optimizer updates and finite-difference probes.
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  double item() const;

  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  /// Gradient accumulated so far; zeros of the value's shape when none.
  Tensor grad() const;
  bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
  void zero_grad();

  /// Seeds d(self)/d(self) = 1 for a 1x1 value and propagates through the
  /// graph in reverse topological order.
  void backward() const;

  const NodePtr& node() const noexcept { return node_; }

  /// Builds an op result. When no parent requires a gradient the result is
  /// a constant and the closure is dropped.
  static Var make(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

 private:
  NodePtr node_;
};

struct NamedParam {
  std::string name;
  Var var;
};

}  // namespace vstg
