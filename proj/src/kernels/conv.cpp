#include "spikescan/kernels/conv.hpp"

#include <algorithm>

#include "spikescan/error.hpp"

namespace spikescan::kernels {

namespace {

void check(const ConvGeometry& g, std::size_t x, std::size_t w, std::size_t bias, std::size_t y) {
  if (g.depthwise && g.c_in != g.c_out) throw ShapeError("depthwise conv needs c_in == c_out");
  if (g.k == 0 || g.pad_left >= g.k + g.steps) throw ShapeError("conv: bad kernel geometry");
  if (x != g.batch * g.c_in * g.steps || w != g.weight_size() || (bias != 0 && bias != g.c_out) ||
      y != g.batch * g.c_out * g.steps)
    throw ShapeError("conv: buffer sizes do not match geometry");
}

inline double weight(const ConvGeometry& g, std::span<const double> w, std::size_t o, std::size_t i,
                     std::size_t j) {
  return g.depthwise ? w[o * g.k + j] : w[(o * g.c_in + i) * g.k + j];
}

// Valid output steps [t0, t1) for kernel tap j: input index t - pad + j in range.
inline std::pair<std::size_t, std::size_t> tap_range(const ConvGeometry& g, std::size_t j) {
  const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(g.pad_left);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
  const std::ptrdiff_t hi =
      std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.steps), static_cast<std::ptrdiff_t>(g.steps) - shift);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

void conv1d_forward_serial(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                           std::span<const double> bias, std::span<double> y) {
  check(g, x.size(), w.size(), bias.size(), y.size());
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t o = 0; o < g.c_out; ++o)
      for (std::size_t t = 0; t < g.steps; ++t) {
        double acc = bias.empty() ? 0.0 : bias[o];
        const std::size_t i_begin = g.depthwise ? o : 0;
        const std::size_t i_end = g.depthwise ? o + 1 : g.c_in;
        for (std::size_t i = i_begin; i < i_end; ++i)
          for (std::size_t j = 0; j < g.k; ++j) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(g.pad_left);
            if (s < 0 || s >= static_cast<std::ptrdiff_t>(g.steps)) continue;
            acc += weight(g, w, o, i, j) * x[(b * g.c_in + i) * g.steps + static_cast<std::size_t>(s)];
          }
        y[(b * g.c_out + o) * g.steps + t] = acc;
      }
}

void conv1d_forward_parallel(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                             std::span<const double> bias, std::span<double> y) {
  check(g, x.size(), w.size(), bias.size(), y.size());
  const auto rows = static_cast<std::ptrdiff_t>(g.batch * g.c_out);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t row = 0; row < rows; ++row) {
    const std::size_t b = static_cast<std::size_t>(row) / g.c_out;
    const std::size_t o = static_cast<std::size_t>(row) % g.c_out;
    double* yrow = y.data() + static_cast<std::size_t>(row) * g.steps;
    std::fill(yrow, yrow + g.steps, bias.empty() ? 0.0 : bias[o]);
    const std::size_t i_begin = g.depthwise ? o : 0;
    const std::size_t i_end = g.depthwise ? o + 1 : g.c_in;
    for (std::size_t i = i_begin; i < i_end; ++i) {
      const double* xrow = x.data() + (b * g.c_in + i) * g.steps;
      for (std::size_t j = 0; j < g.k; ++j) {
        const double wv = weight(g, w, o, i, j);
        const auto [t0, t1] = tap_range(g, j);
        const std::size_t lag = g.pad_left - j;  // wraps for j > pad_left; cancels in t - lag
        for (std::size_t t = t0; t < t1; ++t) yrow[t] += wv * xrow[t - lag];
      }
    }
  }
}

void conv1d_backward_serial(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                            std::span<const double> dy, std::span<double> dx, std::span<double> dw,
                            std::span<double> dbias) {
  check(g, x.size(), w.size(), 0, dy.size());
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), 0.0);
  if (!dw.empty()) std::fill(dw.begin(), dw.end(), 0.0);
  if (!dbias.empty()) std::fill(dbias.begin(), dbias.end(), 0.0);
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t o = 0; o < g.c_out; ++o)
      for (std::size_t t = 0; t < g.steps; ++t) {
        const double gy = dy[(b * g.c_out + o) * g.steps + t];
        if (!dbias.empty()) dbias[o] += gy;
        const std::size_t i_begin = g.depthwise ? o : 0;
        const std::size_t i_end = g.depthwise ? o + 1 : g.c_in;
        for (std::size_t i = i_begin; i < i_end; ++i)
          for (std::size_t j = 0; j < g.k; ++j) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(g.pad_left);
            if (s < 0 || s >= static_cast<std::ptrdiff_t>(g.steps)) continue;
            const std::size_t xi = (b * g.c_in + i) * g.steps + static_cast<std::size_t>(s);
            const std::size_t wi = g.depthwise ? o * g.k + j : (o * g.c_in + i) * g.k + j;
            if (!dx.empty()) dx[xi] += w[wi] * gy;
            if (!dw.empty()) dw[wi] += x[xi] * gy;
          }
      }
}

void conv1d_backward_parallel(const ConvGeometry& g, std::span<const double> x, std::span<const double> w,
                              std::span<const double> dy, std::span<double> dx, std::span<double> dw,
                              std::span<double> dbias) {
  check(g, x.size(), w.size(), 0, dy.size());

  if (!dx.empty()) {
    const auto rows = static_cast<std::ptrdiff_t>(g.batch * g.c_in);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < rows; ++row) {
      const std::size_t b = static_cast<std::size_t>(row) / g.c_in;
      const std::size_t i = static_cast<std::size_t>(row) % g.c_in;
      double* dxrow = dx.data() + static_cast<std::size_t>(row) * g.steps;
      std::fill(dxrow, dxrow + g.steps, 0.0);
      const std::size_t o_begin = g.depthwise ? i : 0;
      const std::size_t o_end = g.depthwise ? i + 1 : g.c_out;
      for (std::size_t o = o_begin; o < o_end; ++o) {
        const double* dyrow = dy.data() + (b * g.c_out + o) * g.steps;
        for (std::size_t j = 0; j < g.k; ++j) {
          const double wv = weight(g, w, o, i, j);
          const auto [t0, t1] = tap_range(g, j);
          const std::size_t lag = g.pad_left - j;
          for (std::size_t t = t0; t < t1; ++t) dxrow[t - lag] += wv * dyrow[t];
        }
      }
    }
  }

  if (!dw.empty() || !dbias.empty()) {
    const auto outs = static_cast<std::ptrdiff_t>(g.c_out);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t oo = 0; oo < outs; ++oo) {
      const std::size_t o = static_cast<std::size_t>(oo);
      if (!dbias.empty()) {
        double acc = 0.0;
        for (std::size_t b = 0; b < g.batch; ++b) {
          const double* dyrow = dy.data() + (b * g.c_out + o) * g.steps;
          for (std::size_t t = 0; t < g.steps; ++t) acc += dyrow[t];
        }
        dbias[o] = acc;
      }
      if (dw.empty()) continue;
      const std::size_t i_begin = g.depthwise ? o : 0;
      const std::size_t i_end = g.depthwise ? o + 1 : g.c_in;
      for (std::size_t i = i_begin; i < i_end; ++i)
        for (std::size_t j = 0; j < g.k; ++j) {
          const auto [t0, t1] = tap_range(g, j);
          double acc = 0.0;
          for (std::size_t b = 0; b < g.batch; ++b) {
            const double* dyrow = dy.data() + (b * g.c_out + o) * g.steps;
            const double* xrow = x.data() + (b * g.c_in + i) * g.steps;
            const std::size_t lag = g.pad_left - j;
            for (std::size_t t = t0; t < t1; ++t) acc += dyrow[t] * xrow[t - lag];
          }
          dw[g.depthwise ? o * g.k + j : (o * g.c_in + i) * g.k + j] = acc;
        }
    }
  }
}

}  // namespace spikescan::kernels
