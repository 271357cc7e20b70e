#pragma once

#include "ntt/precision.hpp"

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace ntt {

struct TensorNode;

// Gradients accumulated during one backward pass, keyed by graph node.
// Kept outside the nodes so concurrent backward passes over shared weights
// never write to shared state.
using GradSink = std::unordered_map<const TensorNode*, std::vector<real>>;

struct TensorNode {
  std::vector<int> shape;
  std::vector<real> value;
  std::vector<real> grad;  // filled for leaves by reverse_gradient
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(const std::vector<real>& grad_out, GradSink&)> backprop;
};

// Dense row-major tensor handle with reverse-mode gradient recording.
// Copying a Tensor copies the handle, not the buffer; operations on tensors
// whose inputs carry requires_grad extend the gradient graph, everything
// else produces a detached constant.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, real fill, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<real> data,
                     bool requires_grad = false);
  static Tensor scalar(real v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(node_->value.size()); }

  std::vector<real>& values() { return node_->value; }
  const std::vector<real>& values() const { return node_->value; }
  real value_at(int i) const { return node_->value[static_cast<std::size_t>(i)]; }
  real item() const;  // value of a single-element tensor

  bool requires_grad() const { return node_->requires_grad; }
  const std::vector<real>& grad() const { return node_->grad; }

  TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<TensorNode>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;

  friend Tensor make_op_result(std::vector<int> shape, std::vector<real> value,
                               std::vector<std::shared_ptr<TensorNode>> parents,
                               std::function<void(const std::vector<real>&, GradSink&)> fn);
};

std::string shape_str(const std::vector<int>& shape);

// Element-wise arithmetic. Shapes must match exactly, except that a
// single-element tensor broadcasts against any shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, real b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, real b);

// matmul: [m x k]·[k x n] -> [m x n], or [m x k]·[k] -> [m].
Tensor matmul(const Tensor& a, const Tensor& b);

// Axis-0 concatenation of rank-1 tensors; slice is its inverse.
Tensor concat(const std::vector<Tensor>& parts);
Tensor slice(const Tensor& t, int start, int len);

// Stack rank-1 tensors of equal length into a [n x len] matrix.
Tensor stack_rows(const std::vector<Tensor>& rows);
// Row i of a rank-2 tensor as a rank-1 view copy; gradient lands in that row.
Tensor row(const Tensor& m, int i);
// Single element as a [1] tensor.
Tensor pick(const Tensor& t, int i);

Tensor tanh(const Tensor& t);
Tensor sigmoid(const Tensor& t);
Tensor relu(const Tensor& t);  // subgradient at 0 is 0
Tensor log(const Tensor& t);   // errors on non-positive entries

Tensor sum(const Tensor& t);   // -> [1]
Tensor mean(const Tensor& t);  // -> [1]

// Numerically stable softmax over a rank-1 tensor; errors on NaN/Inf input.
Tensor softmax(const Tensor& t);

// Reverse-mode sweep from a scalar loss. Returns the gradient of every
// requires_grad node reachable from the loss; nodes not in the map received
// no gradient. Pure: does not touch any node's grad buffer, so separate
// graphs over shared weights can run backward on parallel workers.
GradSink backward(const Tensor& loss);

}  // namespace ntt
