// SPDX-License-Identifier: Apache-2.0
#include "vstg/numcore/autograd.hpp"

#include <unordered_set>

#include "vstg/error.hpp"

namespace vstg {

Tensor& Node::grad_buffer() {
  if (grad.empty() && !value.empty()) grad = Tensor(value.shape());
  if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  return grad;
}

void Node::accumulate(const Tensor& g) {
  Tensor& buf = grad_buffer();
  if (g.size() != buf.size()) {
    throw ShapeError("gradient shape " + shape_str(g.shape()) + " does not match value " +
                     shape_str(value.shape()));
  }
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

double Var::item() const {
  if (node_->value.size() != 1) {
    throw ShapeError("item() on non-scalar " + shape_str(node_->value.shape()));
  }
  return node_->value[0];
}

Tensor Var::grad() const {
  if (!node_ || node_->grad.empty()) return Tensor(node_->value.shape());
  return node_->grad;
}

void Var::zero_grad() {
  if (node_ && !node_->grad.empty()) node_->grad.fill(0.0);
}

Var Var::make(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  Var out(std::move(value), false);
  for (const auto& p : parents) {
    if (p.requires_grad()) {
      out.node_->requires_grad = true;
      break;
    }
  }
  if (out.node_->requires_grad) {
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

void Var::backward() const {
  if (node_->value.size() != 1) {
    throw ShapeError("backward() requires a scalar root, got " + shape_str(node_->value.shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; reversed it is a valid reverse topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, idx] = stack.back();
    if (idx < n->parents.size()) {
      Node* p = n->parents[idx++].get();
      if (p->requires_grad && p->backward && visited.insert(p).second) stack.emplace_back(p, 0);
      continue;
    }
    order.push_back(n);
    stack.pop_back();
  }

  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

}  // namespace vstg
