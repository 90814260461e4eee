#pragma once

#include <random>

#include "spikescan/scan.hpp"
#include "spikescan/surrogate.hpp"
#include "spikescan/tape.hpp"
#include "spikescan/tensor.hpp"

namespace spikescan {

// The parallel spiking neuron family. H is a linear mix of the input along
// time with no bias; S = Heaviside(H - v_th).
//   kFull:    H = X W^T with a dense [T x T] W, tied to T and non-causal.
//   kMasked:  W restricted to the band t - order < i <= t, still tied to T.
//   kSliding: order taps shared over time, H_t = sum_j w_j x_{t-j}.
enum class PsnKind { kFull, kMasked, kSliding };

struct PsnParams {
  PsnKind kind = PsnKind::kSliding;
  Tensor weight;            // [T x T] for kFull/kMasked, [order] for kSliding
  std::size_t t_train = 0;  // 0 for kSliding
  std::size_t order = 0;    // band width (kMasked) or taps (kSliding)

  // Weights uniform in +-1/sqrt(fan-in).
  static PsnParams full(std::size_t t_train, std::mt19937_64& rng);
  static PsnParams masked(std::size_t t_train, std::size_t order, std::mt19937_64& rng);
  static PsnParams sliding(std::size_t order, std::mt19937_64& rng);

  bool non_causal() const { return kind == PsnKind::kFull; }
  // Whether the parameters fix the sequence length.
  bool length_bound() const { return kind != PsnKind::kSliding; }
  // 1 where the weight may be nonzero: everything (kFull), the causal band
  // (kMasked), all taps (kSliding).
  Tensor mask() const;
  // weight .* mask()
  Tensor effective_weight() const;
  void validate() const;
};

// Throws LengthMismatch when a length-bound neuron sees T != t_train.
void require_psn_length(const PsnParams& params, std::size_t steps);

Tensor psn_membrane(const PsnParams& params, const Tensor& x, Execution exec = Execution::kParallel);
Tensor psn_forward(const PsnParams& params, const Tensor& x, double v_th, Execution exec = Execution::kParallel);

// Taped H; gradients reach x and the (masked) weight.
Var psn_membrane(Var x, Var weight, const PsnParams& params);
Var psn_forward(Var x, Var weight, const PsnParams& params, double v_th, const SurrogateKind& sg);

// Online evaluation of a sliding PSN: ring buffer of the last order - 1 inputs.
struct SlidingPsnState {
  Tensor window;  // [B x C x (order - 1)], newest at head - 1
  std::size_t head = 0;
  std::size_t t = 0;

  static SlidingPsnState zeros(const PsnParams& params, std::size_t batch, std::size_t channels);
  std::size_t state_size() const { return window.size(); }
};

struct SlidingPsnStep {
  Tensor s;
  Tensor h;
};

SlidingPsnStep sliding_psn_step(const PsnParams& params, SlidingPsnState& state, const Tensor& x_t, double v_th);

std::string to_string(PsnKind kind);

}  // namespace spikescan
