#pragma once

#include <cstddef>
#include <span>

namespace spikescan::kernels {

enum class Trans { kNo, kYes };

// C[m x n] = op(A) * op(B), row-major, C overwritten.
// op(A) is m x k, op(B) is k x n.
void gemm_serial(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
                 std::span<const double> a, std::span<const double> b, std::span<double> c);

// Same contract. Rows of C are split across OpenMP threads; each element is
// accumulated in a fixed k order, so results do not depend on thread count.
void gemm_parallel(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
                   std::span<const double> a, std::span<const double> b, std::span<double> c);

}  // namespace spikescan::kernels
