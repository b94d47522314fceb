#include "ccsp/graph.hpp"

#include <unordered_set>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::ad {

Tensor& Node::grad_buffer() {
  if (grad.shape() != value.shape() || grad.size() != value.size()) grad = Tensor(value.shape());
  return grad;
}

void Node::accumulate(const Tensor& g) {
  auto& buf = grad_buffer();
  if (g.size() != buf.size()) {
    throw_invalid(fmt::format("adjoint shape {} does not match value shape {} at '{}'", shape_string(g.shape()),
                              shape_string(buf.shape()), name));
  }
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

Var Var::constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->name = "const";
  return Var(std::move(node));
}

Var Var::parameter(Tensor value, std::string name) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->name = std::move(name);
  return Var(std::move(node));
}

Tensor Var::grad() const {
  if (node_->grad.size() == node_->value.size()) return node_->grad;
  return Tensor(node_->value.shape());
}

void Var::zero_grad() {
  if (node_) node_->grad = Tensor(node_->value.shape());
}

Var make_op(std::string name, Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  if (const auto bad = value.first_non_finite(); bad != value.size()) {
    throw_numerical(fmt::format("{}: non-finite output at flat index {}", name, bad));
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->name = std::move(name);
  for (auto& p : parents) {
    if (p.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.ptr());
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

void backward(const Var& root) {
  if (!root.defined()) throw_invalid("backward: undefined root");
  if (root.value().size() != 1) {
    throw_invalid(fmt::format("backward: root must be scalar, got {}", shape_string(root.shape())));
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.ptr().get(), 0}};
  seen.insert(root.ptr().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent != nullptr && parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Tensor seed(root.shape(), 1.0);
  root.ptr()->accumulate(seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward) node->backward(*node);
  }
}

Var detach(const Var& v) { return Var::constant(v.value()); }

}  // namespace ccsp::ad
