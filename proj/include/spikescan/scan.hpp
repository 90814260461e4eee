#pragma once

#include "spikescan/tape.hpp"
#include "spikescan/tensor.hpp"

namespace spikescan {

enum class Execution { kSerial, kParallel };

// H_t = alpha_t * H_{t-1} + (1 - alpha_t) * x_t over the time axis of
// [B x C x T] tensors, starting from h0 [B x C].
struct ScanProblem {
  Tensor alpha;
  Tensor x;
  Tensor h0;

  // h0 defaults to zeros.
  ScanProblem(Tensor alpha, Tensor x);
  ScanProblem(Tensor alpha, Tensor x, Tensor h0);

  std::size_t lanes() const { return batch_of(x) * channels_of(x); }
  std::size_t steps() const { return length_of(x); }
};

// Literal left fold, the reference for every other evaluation path.
Tensor scan_serial(const ScanProblem& p);

// Two-stage chunked scan over pairs (alpha_t, (1 - alpha_t) x_t).
Tensor scan_parallel(const ScanProblem& p);

struct ScanGrads {
  Tensor d_alpha;  // [B x C x T]
  Tensor d_x;      // [B x C x T]
  Tensor d_h0;     // [B x C]
};

// Reverse-mode gradients of the recurrence. With g_t the total gradient at
// H_t, g_t = dH_t + alpha_{t+1} g_{t+1} (a reverse scan), and
//   d_alpha_t = g_t (H_{t-1} - x_t),  d_x_t = g_t (1 - alpha_t),
//   d_h0 = g_1 alpha_1.
ScanGrads scan_backward(const ScanProblem& p, const Tensor& h, const Tensor& d_h,
                        Execution exec = Execution::kParallel);

// Guard band for the explicit product form: alpha must lie in
// [alpha_min, 1 - alpha_min], T <= kMatrixFormMaxSteps, and the running
// product of alphas must stay representable.
inline constexpr double kMatrixFormAlphaMin = 0.05;
inline constexpr std::size_t kMatrixFormMaxSteps = 512;

// T x T weight W for one lane, H = X W with
//   W_ij = (prod_{k=i+1..j} alpha_k)(1 - alpha_i) for j >= i, else 0,
// assembled as (((1 - A) / P)^T P) .* M with P the running product of alphas
// and M the upper-triangular ones mask. Throws StabilityGuard outside the
// guard band.
Tensor transition_matrix(std::span<const double> alpha, double alpha_min = kMatrixFormAlphaMin);

// H via X W per lane (plus the h0 carry P_j * h0). A test oracle only: the
// division by P is unstable, which is why training uses the scan.
Tensor matrix_form(const ScanProblem& p, double alpha_min = kMatrixFormAlphaMin);

// Taped recurrence; gradients flow to alpha and x. h0 is held constant.
Var scan(Var alpha, Var x, const Tensor& h0, Execution exec = Execution::kParallel);
Var scan(Var alpha, Var x, Execution exec = Execution::kParallel);

}  // namespace spikescan
