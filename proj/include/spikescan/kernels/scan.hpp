#pragma once

#include <cstddef>
#include <span>

namespace spikescan::kernels {

// The affine map h -> a*h + b. Composing the per-step maps of a first-order
// linear recurrence is associative, which is what makes the scan parallel.
struct Affine {
  double a = 1.0;
  double b = 0.0;

  double apply(double h) const { return a * h + b; }
};

// Apply `first`, then `second`: (a1,b1) o (a2,b2) = (a1*a2, a2*b1 + b2).
inline Affine compose(Affine first, Affine second) {
  return {first.a * second.a, second.a * first.b + second.b};
}

enum class Direction { kForward, kReverse };

// Time steps per chunk in the two-stage scan.
inline constexpr std::size_t kScanChunk = 256;

// Work-efficient exclusive scan (up-sweep / down-sweep) under `compose`.
// On return items[i] = items[0] o ... o items[i-1], items[0] = identity.
// Operand order is preserved, so the non-commutative operator is safe.
void blelloch_exclusive_scan(std::span<Affine> items);

// Per lane, rows of length `steps` stored contiguously:
//   forward: h[t] = a[t] * h[t-1] + b[t],  h[-1]    = h0[lane]
//   reverse: h[t] = a[t] * h[t+1] + b[t],  h[steps] = h0[lane]
// Reference left fold.
void affine_scan_serial(std::span<const double> a, std::span<const double> b, std::span<const double> h0,
                        std::size_t lanes, std::size_t steps, Direction dir, std::span<double> out);

// Same contract, two-stage scan: each chunk of `chunk` steps is folded to a
// single Affine, the chunk maps are combined with blelloch_exclusive_scan to
// get every chunk's carry-in, then chunks are re-folded from their carries.
// Lanes and chunks are distributed over OpenMP threads; chunk boundaries are
// fixed, so the result is bit-identical for any thread count.
void affine_scan_parallel(std::span<const double> a, std::span<const double> b, std::span<const double> h0,
                          std::size_t lanes, std::size_t steps, Direction dir, std::span<double> out,
                          std::size_t chunk = kScanChunk);

}  // namespace spikescan::kernels
