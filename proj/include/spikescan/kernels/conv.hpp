#pragma once

#include <cstddef>
#include <span>

namespace spikescan::kernels {

// Geometry of a 1-D convolution over [batch x c_in x steps] producing
// [batch x c_out x steps]. The output at step t reads inputs
// t - pad_left .. t - pad_left + k - 1; out-of-range inputs are zero.
// Causal: pad_left = k - 1. Same (odd k): pad_left = k / 2.
struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t steps = 1;
  std::size_t k = 1;
  std::size_t pad_left = 0;
  bool depthwise = false;  // c_in == c_out, weight is [c x k]

  std::size_t weight_size() const { return depthwise ? c_out * k : c_out * c_in * k; }
};

// y = conv(x, w) + bias. Weight layout [c_out x c_in x k] (or [c x k] when
// depthwise); bias may be empty.
void conv1d_forward_serial(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                           std::span<const double> bias, std::span<double> y);
void conv1d_forward_parallel(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                             std::span<const double> bias, std::span<double> y);

// Gradients of conv1d_forward w.r.t. x, w and bias given dy. Any output span
// may be empty to skip it. Outputs are overwritten, not accumulated.
void conv1d_backward_serial(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                            std::span<const double> dy, std::span<double> dx, std::span<double> dw,
                            std::span<double> dbias);
void conv1d_backward_parallel(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                              std::span<const double> dy, std::span<double> dx, std::span<double> dw,
                              std::span<double> dbias);

}  // namespace spikescan::kernels
