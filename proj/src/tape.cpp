#include "spikescan/tape.hpp"

#include <string>

namespace spikescan {

const Tensor& Var::value() const { return tape->value(*this); }
const Tensor& Var::grad() const { return tape->grad(*this); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  value.require_finite("leaf");
  nodes_.push_back(Node{"leaf", {}, std::move(value), nullptr, requires_grad});
  grads_.emplace_back();
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, std::vector<Var> inputs, Tensor value, BackwardFn fn) {
  value.require_finite(std::string(op).c_str());
  Node node{op, {}, std::move(value), std::move(fn), false};
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (in.tape != this) throw ShapeError(std::string(op) + ": input belongs to another tape");
    node.inputs.push_back(in.id);
    node.requires_grad = node.requires_grad || nodes_[in.id].requires_grad;
  }
  if (!node.requires_grad) node.backward = nullptr;
  nodes_.push_back(std::move(node));
  grads_.emplace_back();
  return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::grad(Var v) const {
  Tensor& g = grads_[v.id];
  if (g.empty()) g = Tensor(nodes_[v.id].value.shape(), 0.0);
  return g;
}

void Tape::backward(Var root) {
  if (nodes_[root.id].value.size() != 1)
    throw ShapeError("backward(root) needs a single-element root; pass a seed instead");
  backward(root, Tensor(nodes_[root.id].value.shape(), 1.0));
}

void Tape::backward(Var root, const Tensor& seed) {
  require_same_shape(nodes_[root.id].value, seed, "backward seed");
  for (auto& g : grads_) g = Tensor();
  grads_[root.id] = seed;

  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.backward || grads_[id].empty()) continue;
    std::vector<Tensor> in_grads = node.backward(grads_[id]);
    for (std::size_t k = 0; k < node.inputs.size() && k < in_grads.size(); ++k) {
      Tensor& contribution = in_grads[k];
      const std::size_t in = node.inputs[k];
      if (contribution.empty() || !nodes_[in].requires_grad) continue;
      Tensor& acc = grads_[in];
      if (acc.empty()) {
        require_same_shape(nodes_[in].value, contribution, node.op.data());
        acc = std::move(contribution);
      } else {
        require_same_shape(acc, contribution, node.op.data());
        auto dst = acc.data();
        auto src = contribution.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      }
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  grads_.clear();
}

}  // namespace spikescan
