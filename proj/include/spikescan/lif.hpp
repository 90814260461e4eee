#pragma once

#include "spikescan/surrogate.hpp"
#include "spikescan/tape.hpp"
#include "spikescan/tensor.hpp"

namespace spikescan {

enum class ResetMode { kHard, kSoft, kNone };
enum class Leak { kIF, kLIF };

// LIF: H_t = beta V_{t-1} + (1 - beta) x_t.  IF: H_t = V_{t-1} + x_t.
// S_t = Heaviside(H_t - v_th). Hard reset V_t = H_t (1 - S_t) + v_reset S_t,
// soft reset V_t = H_t - v_th S_t, none V_t = H_t.
struct NeuronConfig {
  double beta = 0.5;
  double v_th = 1.0;
  double v_reset = 0.0;
  ResetMode reset = ResetMode::kHard;
  Leak leak = Leak::kLIF;

  // beta = 1 - 1 / tau_m.
  static NeuronConfig lif(double tau_m, ResetMode reset, double v_th = 1.0);
  static NeuronConfig integrate_and_fire(ResetMode reset, double v_th = 1.0);

  // Throws DomainError unless v_th > 0 and, for LIF, 0 <= beta < 1.
  void validate() const;
};

// V_t per lane after reset; the resting state is V_0 = 0 at t = 0.
struct NeuronState {
  Tensor v;
  std::size_t t = 0;

  static NeuronState resting(std::size_t batch, std::size_t channels);
};

struct LifStep {
  Tensor s;
  Tensor h;
  NeuronState state;
};

// One step on x_t [B x C].
LifStep lif_step(const NeuronConfig& cfg, const NeuronState& state, const Tensor& x_t);

struct LifTrace {
  Tensor s;  // spikes
  Tensor h;  // pre-reset membrane
  Tensor v;  // post-reset membrane
};

// Folds lif_step over the time axis of x [B x C x T] from rest.
LifTrace lif_sequence(const NeuronConfig& cfg, const Tensor& x);

// Taped spikes with backpropagation through time. Reset paths are
// differentiated through the surrogate (no detach): for hard reset
// dV/dH = 1 - S + (v_reset - H) sg'(H - v_th), for soft reset
// dV/dH = 1 - v_th sg'(H - v_th).
Var lif_forward(Var x, const NeuronConfig& cfg, const SurrogateKind& sg);

// No-reset recurrences are linear and run through the affine scan.
// Throws DomainError for reset modes other than kNone.
Tensor lif_membrane_parallel(const NeuronConfig& cfg, const Tensor& x);

std::string to_string(ResetMode mode);

}  // namespace spikescan
