#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "spikescan/tensor.hpp"

namespace spikescan {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives and
// has not been cleared.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
};

// Maps the gradient flowing into a node to one gradient per input. An empty
// Tensor in the result means "no contribution" for that input.
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;

// Append-only reverse-mode tape. Nodes are topologically ordered by creation;
// backward() walks them in strict reverse so every node's gradient is complete
// before it is propagated. Single owner, not thread-safe.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Records a derived node. `value` must be finite; throws NonFiniteError
  // otherwise, naming `op`.
  Var record(std::string_view op, std::vector<Var> inputs, Tensor value, BackwardFn fn);

  // Seeds d(root)/d(root) = 1; root must hold a single element.
  void backward(Var root);
  void backward(Var root, const Tensor& seed);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  // Zero tensor of the node's shape when nothing has flowed into it.
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    std::string_view op;
    std::vector<std::size_t> inputs;
    Tensor value;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  mutable std::vector<Tensor> grads_;
};

}  // namespace spikescan
