#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spikescan/surrogate.hpp"
#include "spikescan/tape.hpp"

namespace spikescan {

enum class BinaryOp { kAdd, kSub, kMul, kDiv };

// Elementwise arithmetic. Operands must have equal shapes, or one of them
// must be a single-element tensor (broadcast scalar). kDiv throws
// DomainError when any divisor element is zero.
Var elementwise(BinaryOp op, Var a, Var b);
Var elementwise(BinaryOp op, Var a, double b);

inline Var add(Var a, Var b) { return elementwise(BinaryOp::kAdd, a, b); }
inline Var sub(Var a, Var b) { return elementwise(BinaryOp::kSub, a, b); }
inline Var mul(Var a, Var b) { return elementwise(BinaryOp::kMul, a, b); }
inline Var div(Var a, Var b) { return elementwise(BinaryOp::kDiv, a, b); }
inline Var add(Var a, double b) { return elementwise(BinaryOp::kAdd, a, b); }
inline Var sub(Var a, double b) { return elementwise(BinaryOp::kSub, a, b); }
inline Var mul(Var a, double b) { return elementwise(BinaryOp::kMul, a, b); }
inline Var div(Var a, double b) { return elementwise(BinaryOp::kDiv, a, b); }

Var sigmoid(Var a);
Var relu(Var a);
// a^exponent. Non-integer exponents need a > 0.
Var pow(Var a, double exponent);

// [m x k] * [k x n]
Var matmul(Var a, Var b);

// Forward: Heaviside(h - v_th) with Heaviside(0) = 1. Backward: surrogate.
Var spike_threshold(Var h, double v_th, const SurrogateKind& sg);

// Forward: surrogate primitive of (h - v_th); backward: same surrogate
// derivative as spike_threshold. A smooth relaxation of the firing stage.
Var spike_relaxed(Var h, double v_th, const SurrogateKind& sg);

// Forward: clip(round-half-away-from-zero(h), 0, n_max). Backward:
// straight-through, 1 where h lies in [0, n_max] and 0 outside.
Var clip_round(Var h, int n_max);

Var sum(Var a);
Var mean(Var a);
// mean((a - target)^2)
Var mse(Var a, const Tensor& target);
// logits [B x K], labels in [0, K). Mean over the batch.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

Var reshape(Var a, Shape shape);

// 1-D convolution over time. x is [B x C_in x T]; w is [C_out x C_in x k], or
// [C x k] for a depthwise (per-channel) kernel. Output step t reads inputs
// t - pad_left .. t - pad_left + k - 1, zero outside; pad_left = k - 1 is
// causal. A k = 1 kernel is a per-step channel mix.
Var conv1d(Var x, Var w, std::optional<Var> bias, std::size_t pad_left);
inline Var causal_conv1d(Var x, Var w, std::optional<Var> bias) {
  return conv1d(x, w, bias, w.shape()[w.shape().rank() - 1] - 1);
}

// [B x C x T] -> [B x C], mean over time.
Var time_mean(Var x);

// Plain-tensor forward helpers shared with the untaped serial paths.
double sigmoid_scalar(double x);
double clip_round_scalar(double h, int n_max);
inline double heaviside(double u) { return u >= 0.0 ? 1.0 : 0.0; }

}  // namespace spikescan
