#include "spikescan/kernels/gemm.hpp"

#include <algorithm>
#include <vector>

namespace spikescan::kernels {

namespace {

inline double elem(Trans t, std::span<const double> x, std::size_t rows, std::size_t cols, std::size_t r,
                   std::size_t c) {
  // op(X) is rows x cols; X itself is stored rows x cols or cols x rows.
  return t == Trans::kNo ? x[r * cols + c] : x[c * rows + r];
}

constexpr std::size_t kBlockK = 1024;
constexpr std::size_t kBlockN = 32;

}  // namespace

void gemm_serial(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
                 std::span<const double> a, std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += elem(ta, a, m, k, i, p) * elem(tb, b, k, n, p, j);
      c[i * n + j] = acc;
    }
  }
}

void gemm_parallel(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
                   std::span<const double> a, std::span<const double> b, std::span<double> c) {
  std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(m * n), 0.0);
  const auto mm = static_cast<std::ptrdiff_t>(m);

  if (ta == Trans::kNo && tb == Trans::kNo) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < mm; ++i) {
      double* crow = c.data() + i * static_cast<std::ptrdiff_t>(n);
      const double* arow = a.data() + i * static_cast<std::ptrdiff_t>(k);
      for (std::size_t p = 0; p < k; ++p) {
        const double av = arow[p];
        const double* brow = b.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
    return;
  }

  if (ta == Trans::kNo && tb == Trans::kYes) {
    // C = A * B^T with B stored n x k: blocked dot products. Partial sums are
    // carried in C across k-blocks, so the summation order is p ascending.
    const auto nblocks = static_cast<std::ptrdiff_t>((n + kBlockN - 1) / kBlockN);
    for (std::size_t p0 = 0; p0 < k; p0 += kBlockK) {
      const std::size_t p1 = std::min(k, p0 + kBlockK);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t jb = 0; jb < nblocks; ++jb) {
        const std::size_t j0 = static_cast<std::size_t>(jb) * kBlockN;
        const std::size_t j1 = std::min(n, j0 + kBlockN);
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = a.data() + i * k;
          for (std::size_t j = j0; j < j1; ++j) {
            const double* brow = b.data() + j * k;
            double acc = c[i * n + j];
            for (std::size_t p = p0; p < p1; ++p) acc += arow[p] * brow[p];
            c[i * n + j] = acc;
          }
        }
      }
    }
    return;
  }

  if (ta == Trans::kYes && tb == Trans::kNo) {
    // A stored k x m.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < mm; ++i) {
      double* crow = c.data() + i * static_cast<std::ptrdiff_t>(n);
      for (std::size_t p = 0; p < k; ++p) {
        const double av = a[p * m + static_cast<std::size_t>(i)];
        if (av == 0.0) continue;
        const double* brow = b.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
    return;
  }

  // Both transposed: materialise op(A) and fall back to the NN path.
  std::vector<double> at(m * k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) at[i * k + p] = a[p * m + i];
  std::vector<double> bt(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  gemm_parallel(Trans::kNo, Trans::kNo, m, n, k, at, bt, c);
}

}  // namespace spikescan::kernels
