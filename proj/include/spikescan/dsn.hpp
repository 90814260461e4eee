#pragma once

#include <optional>
#include <random>

#include "spikescan/scan.hpp"
#include "spikescan/surrogate.hpp"
#include "spikescan/tape.hpp"
#include "spikescan/tensor.hpp"

namespace spikescan {

// How H becomes a spike. kInteger: clip(round(H), 0, n_max). kBinary:
// Heaviside(H - v_th). kRelaxed: the surrogate primitive of H - v_th, a
// smooth stand-in used only to check gradients end to end (untaped paths
// use ArcTangent{2}; the taped path uses the surrogate it is given).
enum class Firing { kInteger, kBinary, kRelaxed };

// Dynamic-decay neuron:
//   a'_t    = sum_j conv_kernel[c, j] x_{t-k+1+j} + conv_bias[c]   (causal, depthwise)
//   a''_t   = channel_mix a'_t                                      (enhanced variant only)
//   alpha_t = sigmoid(a''_t)^(1 / tau)
//   H_t     = alpha_t H_{t-1} + (1 - alpha_t) x_t
struct DsnParams {
  Tensor conv_kernel;                 // [C x k]
  Tensor conv_bias;                   // [C]; empty when the conv has no bias
  std::optional<Tensor> channel_mix;  // [C x C]
  double tau = 0.25;
  int n_max = 4;
  Firing firing = Firing::kInteger;
  double v_th = 1.0;  // binary and relaxed firing only

  // Kernel and bias uniform in +-1/sqrt(k); the mix starts as the identity.
  static DsnParams init(std::size_t channels, std::size_t k, std::mt19937_64& rng, bool enhanced = false);

  std::size_t channels() const { return conv_kernel.shape()[0]; }
  std::size_t k() const { return conv_kernel.shape()[1]; }
  bool has_bias() const { return !conv_bias.empty(); }
  void validate() const;
};

// alpha_t [B x C] from the window x_{t-k+1..t} [B x C x k], oldest first.
// Windows reaching before the sequence start are zero-padded by the caller.
Tensor dsn_dynamic_decay(const DsnParams& params, const Tensor& x_window);

// Streaming state: H_{t-1} and a ring buffer of the last k - 1 inputs.
struct DsnState {
  Tensor h;       // [B x C]
  Tensor window;  // [B x C x (k - 1)]
  std::size_t head = 0;
  std::size_t t = 0;

  static DsnState zeros(const DsnParams& params, std::size_t batch);
  // Doubles carried between steps; independent of t.
  std::size_t state_size() const { return h.size() + window.size(); }
};

struct DsnStep {
  Tensor s;
  Tensor h;
  Tensor alpha;
};

// Advances `state` by one input x_t [B x C].
DsnStep dsn_step(const DsnParams& params, DsnState& state, const Tensor& x_t);

struct DsnOutput {
  Tensor s;      // [B x C x T]
  Tensor h;      // [B x C x T]
  Tensor alpha;  // [B x C x T]
};

// Training-mode evaluation: batched causal conv for every alpha_t, then the
// scan. kSerial uses the reference kernels, kParallel the threaded ones.
DsnOutput dsn_forward_parallel(const DsnParams& params, const Tensor& x, Execution exec = Execution::kParallel);

// Step fold of dsn_step over x from a zero state.
DsnOutput dsn_forward_serial(const DsnParams& params, const Tensor& x);

Tensor dsn_fire(const DsnParams& params, const Tensor& h);

// Learnable tensors of a taped DSN. Shapes as in DsnParams.
struct DsnVars {
  Var kernel;
  std::optional<Var> bias;
  std::optional<Var> mix;

  static DsnVars leaves(Tape& tape, const DsnParams& params);
};

struct DsnTaped {
  Var s;
  Var h;
  Var alpha;
};

// Differentiable forward; `params` supplies tau, n_max, firing and v_th.
DsnTaped dsn_forward(Var x, const DsnVars& vars, const DsnParams& params, const SurrogateKind& sg,
                     Execution exec = Execution::kParallel);

}  // namespace spikescan
