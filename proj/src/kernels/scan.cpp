#include "spikescan/kernels/scan.hpp"

#include <bit>
#include <vector>

#include "spikescan/error.hpp"

namespace spikescan::kernels {

namespace {

void check_sizes(std::span<const double> a, std::span<const double> b, std::span<const double> h0,
                 std::size_t lanes, std::size_t steps, std::span<double> out) {
  const std::size_t n = lanes * steps;
  if (a.size() != n || b.size() != n || out.size() != n || h0.size() != lanes)
    throw ShapeError("affine scan: buffer sizes do not match lanes x steps");
}

// Position of the i-th step in processing order.
inline std::size_t step_index(Direction dir, std::size_t steps, std::size_t i) {
  return dir == Direction::kForward ? i : steps - 1 - i;
}

}  // namespace

void blelloch_exclusive_scan(std::span<Affine> items) {
  const std::size_t n = items.size();
  if (n == 0) return;
  const std::size_t padded = std::bit_ceil(n);
  std::vector<Affine> tree(padded);
  std::copy(items.begin(), items.end(), tree.begin());

  // Up-sweep: each right node becomes left-subtree o right-subtree.
  for (std::size_t stride = 1; stride < padded; stride *= 2) {
    const auto pairs = static_cast<std::ptrdiff_t>(padded / (2 * stride));
#pragma omp parallel for schedule(static) if (pairs > 64)
    for (std::ptrdiff_t p = 0; p < pairs; ++p) {
      const std::size_t right = static_cast<std::size_t>(p) * 2 * stride + 2 * stride - 1;
      tree[right] = compose(tree[right - stride], tree[right]);
    }
  }

  // Down-sweep: a node's prefix passes to its left child; the right child gets
  // prefix o left-subtree.
  tree[padded - 1] = Affine{};
  for (std::size_t stride = padded / 2; stride >= 1; stride /= 2) {
    const auto pairs = static_cast<std::ptrdiff_t>(padded / (2 * stride));
#pragma omp parallel for schedule(static) if (pairs > 64)
    for (std::ptrdiff_t p = 0; p < pairs; ++p) {
      const std::size_t right = static_cast<std::size_t>(p) * 2 * stride + 2 * stride - 1;
      const std::size_t left = right - stride;
      const Affine left_sum = tree[left];
      tree[left] = tree[right];
      tree[right] = compose(tree[right], left_sum);
    }
    if (stride == 1) break;
  }
  std::copy(tree.begin(), tree.begin() + static_cast<std::ptrdiff_t>(n), items.begin());
}

void affine_scan_serial(std::span<const double> a, std::span<const double> b, std::span<const double> h0,
                        std::size_t lanes, std::size_t steps, Direction dir, std::span<double> out) {
  check_sizes(a, b, h0, lanes, steps, out);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    const std::size_t base = lane * steps;
    double h = h0[lane];
    for (std::size_t i = 0; i < steps; ++i) {
      const std::size_t t = base + step_index(dir, steps, i);
      h = a[t] * h + b[t];
      out[t] = h;
    }
  }
}

void affine_scan_parallel(std::span<const double> a, std::span<const double> b, std::span<const double> h0,
                          std::size_t lanes, std::size_t steps, Direction dir, std::span<double> out,
                          std::size_t chunk) {
  check_sizes(a, b, h0, lanes, steps, out);
  if (chunk == 0) throw DomainError("affine scan: chunk size must be positive");
  if (steps == 0) return;
  const std::size_t chunks = (steps + chunk - 1) / chunk;
  const auto tasks = static_cast<std::ptrdiff_t>(lanes * chunks);

  auto fold_chunk = [&](std::size_t lane, std::size_t c, double carry, bool write) {
    const std::size_t base = lane * steps;
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(steps, begin + chunk);
    Affine acc{1.0, carry};
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t t = base + step_index(dir, steps, i);
      acc.a *= a[t];
      acc.b = a[t] * acc.b + b[t];
      if (write) out[t] = acc.b;
    }
    return acc;
  };

  if (chunks == 1) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t lane = 0; lane < static_cast<std::ptrdiff_t>(lanes); ++lane)
      fold_chunk(static_cast<std::size_t>(lane), 0, h0[static_cast<std::size_t>(lane)], true);
    return;
  }

  // Stage 1: summarise each chunk as one affine map.
  std::vector<Affine> summary(lanes * chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t task = 0; task < tasks; ++task) {
    const std::size_t lane = static_cast<std::size_t>(task) / chunks;
    const std::size_t c = static_cast<std::size_t>(task) % chunks;
    summary[static_cast<std::size_t>(task)] = fold_chunk(lane, c, 0.0, false);
  }

  // Stage 2: exclusive scan of chunk maps per lane gives each chunk's carry.
  std::vector<double> carry(lanes * chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t lane = 0; lane < static_cast<std::ptrdiff_t>(lanes); ++lane) {
    const std::size_t l = static_cast<std::size_t>(lane);
    std::span<Affine> row(summary.data() + l * chunks, chunks);
    blelloch_exclusive_scan(row);
    for (std::size_t c = 0; c < chunks; ++c) carry[l * chunks + c] = row[c].apply(h0[l]);
  }

  // Stage 3: re-fold every chunk from its carry-in.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t task = 0; task < tasks; ++task) {
    const std::size_t lane = static_cast<std::size_t>(task) / chunks;
    const std::size_t c = static_cast<std::size_t>(task) % chunks;
    fold_chunk(lane, c, carry[static_cast<std::size_t>(task)], true);
  }
}

}  // namespace spikescan::kernels
