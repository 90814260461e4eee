#pragma once

#include <cstddef>
#include <span>

namespace spikescan::kernels {

// Time mixing of the PSN family over `lanes` rows of `steps` samples.
//
// Dense: h[l, t] = sum_i w[t, i] x[l, i], i.e. H = X W^T with W [steps x steps].
void psn_dense_forward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                              std::span<const double> x, std::span<double> h);
void psn_dense_forward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                std::span<const double> x, std::span<double> h);

// dX = dH W and dW = dH^T X. Either output may be empty to skip it.
void psn_dense_backward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                               std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                               std::span<double> dw);
void psn_dense_backward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                 std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                                 std::span<double> dw);

// Sliding window of k shared taps, tap 0 on the current step:
// h[l, t] = sum_{j < k, j <= t} w[j] x[l, t - j].
void psn_sliding_forward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                std::span<const double> x, std::span<double> h);
void psn_sliding_forward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                  std::span<const double> x, std::span<double> h);
void psn_sliding_backward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                 std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                                 std::span<double> dw);
void psn_sliding_backward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                   std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                                   std::span<double> dw);

}  // namespace spikescan::kernels
