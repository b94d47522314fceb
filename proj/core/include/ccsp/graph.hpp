#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ccsp/tensor.hpp"

namespace ccsp::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// A value in the computation graph. `backward` reads this node's adjoint and
// accumulates into the parents' adjoints; it is empty for leaves.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::string name;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;

  // Adds `g` into this node's adjoint, allocating it on first use.
  void accumulate(const Tensor& g);
  Tensor& grad_buffer();
};

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  static Var constant(Tensor value);
  static Var parameter(Tensor value, std::string name = {});

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  // Zeros of the value's shape when no adjoint has reached this node.
  Tensor grad() const;
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  const std::string& name() const { return node_->name; }
  const Shape& shape() const { return node_->value.shape(); }
  void zero_grad();

  Node& node() { return *node_; }
  const NodePtr& ptr() const { return node_; }

 private:
  NodePtr node_;
};

// Creates an op result. The backward closure is dropped when no parent needs
// gradients. Throws a numerical error when `value` holds NaN/Inf.
Var make_op(std::string name, Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

// Reverse sweep from a scalar root: seeds d(root)/d(root) = 1 and visits
// every reachable node once in reverse topological order.
void backward(const Var& root);

// Fresh leaf sharing the value but cut from the graph.
Var detach(const Var& v);

}  // namespace ccsp::ad
