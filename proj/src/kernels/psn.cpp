#include "spikescan/kernels/psn.hpp"

#include <algorithm>
#include <vector>

#include "spikescan/error.hpp"
#include "spikescan/kernels/gemm.hpp"

namespace spikescan::kernels {

namespace {

void check_dense(std::size_t lanes, std::size_t steps, std::size_t w, std::size_t x, std::size_t h) {
  if (w != steps * steps || x != lanes * steps || h != lanes * steps)
    throw ShapeError("psn: buffer sizes do not match lanes x steps");
}

void check_sliding(std::size_t lanes, std::size_t steps, std::size_t w, std::size_t x, std::size_t h) {
  if (w == 0 || x != lanes * steps || h != lanes * steps)
    throw ShapeError("sliding psn: buffer sizes do not match lanes x steps");
}

}  // namespace

void psn_dense_forward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                              std::span<const double> x, std::span<double> h) {
  check_dense(lanes, steps, w.size(), x.size(), h.size());
  gemm_serial(Trans::kNo, Trans::kYes, lanes, steps, steps, x, w, h);
}

void psn_dense_forward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                std::span<const double> x, std::span<double> h) {
  check_dense(lanes, steps, w.size(), x.size(), h.size());
  gemm_parallel(Trans::kNo, Trans::kYes, lanes, steps, steps, x, w, h);
}

void psn_dense_backward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                               std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                               std::span<double> dw) {
  check_dense(lanes, steps, w.size(), x.size(), dh.size());
  if (!dx.empty()) gemm_serial(Trans::kNo, Trans::kNo, lanes, steps, steps, dh, w, dx);
  if (!dw.empty()) gemm_serial(Trans::kYes, Trans::kNo, steps, steps, lanes, dh, x, dw);
}

void psn_dense_backward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                 std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                                 std::span<double> dw) {
  check_dense(lanes, steps, w.size(), x.size(), dh.size());
  if (!dx.empty()) gemm_parallel(Trans::kNo, Trans::kNo, lanes, steps, steps, dh, w, dx);
  if (!dw.empty()) gemm_parallel(Trans::kYes, Trans::kNo, steps, steps, lanes, dh, x, dw);
}

void psn_sliding_forward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                std::span<const double> x, std::span<double> h) {
  check_sliding(lanes, steps, w.size(), x.size(), h.size());
  for (std::size_t l = 0; l < lanes; ++l)
    for (std::size_t t = 0; t < steps; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w.size() && j <= t; ++j) acc += w[j] * x[l * steps + t - j];
      h[l * steps + t] = acc;
    }
}

void psn_sliding_forward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                  std::span<const double> x, std::span<double> h) {
  check_sliding(lanes, steps, w.size(), x.size(), h.size());
  const std::size_t k = w.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ll = 0; ll < static_cast<std::ptrdiff_t>(lanes); ++ll) {
    const std::size_t l = static_cast<std::size_t>(ll);
    const double* xr = x.data() + l * steps;
    double* hr = h.data() + l * steps;
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t taps = std::min(k, t + 1);
      double acc = 0.0;
      for (std::size_t j = 0; j < taps; ++j) acc += w[j] * xr[t - j];
      hr[t] = acc;
    }
  }
}

void psn_sliding_backward_serial(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                 std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                                 std::span<double> dw) {
  check_sliding(lanes, steps, w.size(), x.size(), dh.size());
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), 0.0);
  if (!dw.empty()) std::fill(dw.begin(), dw.end(), 0.0);
  for (std::size_t l = 0; l < lanes; ++l)
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t j = 0; j < w.size() && j <= t; ++j) {
        const double g = dh[l * steps + t];
        if (!dx.empty()) dx[l * steps + t - j] += w[j] * g;
        if (!dw.empty()) dw[j] += x[l * steps + t - j] * g;
      }
}

void psn_sliding_backward_parallel(std::size_t lanes, std::size_t steps, std::span<const double> w,
                                   std::span<const double> x, std::span<const double> dh, std::span<double> dx,
                                   std::span<double> dw) {
  check_sliding(lanes, steps, w.size(), x.size(), dh.size());
  const std::size_t k = w.size();
  if (!dx.empty()) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ll = 0; ll < static_cast<std::ptrdiff_t>(lanes); ++ll) {
      const std::size_t l = static_cast<std::size_t>(ll);
      const double* gr = dh.data() + l * steps;
      double* dxr = dx.data() + l * steps;
      for (std::size_t s = 0; s < steps; ++s) {
        const std::size_t taps = std::min(k, steps - s);
        double acc = 0.0;
        for (std::size_t j = 0; j < taps; ++j) acc += w[j] * gr[s + j];
        dxr[s] = acc;
      }
    }
  }
  if (!dw.empty()) {
    // Per-lane partials, reduced in lane order for a thread-count independent sum.
    std::vector<double> partial(lanes * k, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ll = 0; ll < static_cast<std::ptrdiff_t>(lanes); ++ll) {
      const std::size_t l = static_cast<std::size_t>(ll);
      const double* gr = dh.data() + l * steps;
      const double* xr = x.data() + l * steps;
      for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
        for (std::size_t t = j; t < steps; ++t) acc += gr[t] * xr[t - j];
        partial[l * k + j] = acc;
      }
    }
    std::fill(dw.begin(), dw.end(), 0.0);
    for (std::size_t l = 0; l < lanes; ++l)
      for (std::size_t j = 0; j < k; ++j) dw[j] += partial[l * k + j];
  }
}

}  // namespace spikescan::kernels
