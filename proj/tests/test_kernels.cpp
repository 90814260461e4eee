#include <omp.h>

#include <random>
#include <vector>

#include "doctest.h"
#include "spikescan/error.hpp"
#include "spikescan/kernels/conv.hpp"
#include "spikescan/kernels/gemm.hpp"
#include "spikescan/kernels/scan.hpp"

using namespace spikescan;
using namespace spikescan::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Element (r, c) of op(M) where M is stored row-major with `cols` columns.
double op_at(const std::vector<double>& m, bool trans, std::size_t cols, std::size_t r, std::size_t c) {
  return trans ? m[c * cols + r] : m[r * cols + c];
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("gemm serial and parallel agree with a triple loop for every transpose") {
    std::mt19937_64 rng(21);
    const std::size_t m = 7, n = 5, k = 1100;  // k crosses the NT block size
    for (bool ta : {false, true})
      for (bool tb : {false, true}) {
        const auto a = random_vec(m * k, rng), b = random_vec(k * n, rng);
        std::vector<double> oracle(m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < k; ++p)
              oracle[i * n + j] += op_at(a, ta, ta ? m : k, i, p) * op_at(b, tb, tb ? k : n, p, j);
        std::vector<double> cs(m * n, 9.0), cp(m * n, 9.0);
        const Trans xa = ta ? Trans::kYes : Trans::kNo, xb = tb ? Trans::kYes : Trans::kNo;
        gemm_serial(xa, xb, m, n, k, a, b, cs);
        gemm_parallel(xa, xb, m, n, k, a, b, cp);
        CHECK(max_diff(cs, oracle) <= 1e-12);
        CHECK(max_diff(cp, oracle) <= 1e-12);
      }
  }

  TEST_CASE("conv serial and parallel agree with a direct oracle") {
    std::mt19937_64 rng(22);
    for (bool depthwise : {false, true})
      for (std::size_t pad : {std::size_t{0}, std::size_t{1}, std::size_t{3}}) {
        ConvGeometry g;
        g.batch = 2;
        g.c_in = 3;
        g.c_out = depthwise ? 3 : 4;
        g.steps = 9;
        g.k = 4;
        g.pad_left = pad;
        g.depthwise = depthwise;
        const auto x = random_vec(g.batch * g.c_in * g.steps, rng);
        const auto w = random_vec(g.weight_size(), rng);
        const auto bias = random_vec(g.c_out, rng);
        std::vector<double> oracle(g.batch * g.c_out * g.steps);
        for (std::size_t b = 0; b < g.batch; ++b)
          for (std::size_t o = 0; o < g.c_out; ++o)
            for (std::size_t t = 0; t < g.steps; ++t) {
              double acc = bias[o];
              for (std::size_t i = 0; i < g.c_in; ++i) {
                if (depthwise && i != o) continue;
                for (std::size_t j = 0; j < g.k; ++j) {
                  const long s = static_cast<long>(t + j) - static_cast<long>(pad);
                  if (s < 0 || s >= static_cast<long>(g.steps)) continue;
                  const double wv = depthwise ? w[o * g.k + j] : w[(o * g.c_in + i) * g.k + j];
                  acc += wv * x[(b * g.c_in + i) * g.steps + static_cast<std::size_t>(s)];
                }
              }
              oracle[(b * g.c_out + o) * g.steps + t] = acc;
            }
        std::vector<double> ys(oracle.size()), yp(oracle.size());
        conv1d_forward_serial(g, x, w, bias, ys);
        conv1d_forward_parallel(g, x, w, bias, yp);
        CHECK(max_diff(ys, oracle) <= 1e-13);
        CHECK(max_diff(yp, oracle) <= 1e-13);

        const auto dy = random_vec(oracle.size(), rng);
        std::vector<double> dxs(x.size()), dws(w.size()), dbs(bias.size());
        std::vector<double> dxp(x.size()), dwp(w.size()), dbp(bias.size());
        conv1d_backward_serial(g, x, w, dy, dxs, dws, dbs);
        conv1d_backward_parallel(g, x, w, dy, dxp, dwp, dbp);
        CHECK(max_diff(dxs, dxp) <= 1e-13);
        CHECK(max_diff(dws, dwp) <= 1e-13);
        CHECK(max_diff(dbs, dbp) <= 1e-13);

        // <dy, conv(x)> is linear in x, so its gradient is the adjoint.
        const double eps = 1e-6;
        std::vector<double> xp = x;
        xp[5] += eps;
        std::vector<double> yplus(oracle.size());
        conv1d_forward_serial(g, xp, w, bias, yplus);
        double directional = 0.0;
        for (std::size_t i = 0; i < dy.size(); ++i) directional += dy[i] * (yplus[i] - ys[i]) / eps;
        CHECK(directional == doctest::Approx(dxs[5]).epsilon(1e-6));
      }
  }

  TEST_CASE("conv rejects mismatched buffers") {
    ConvGeometry g;
    g.steps = 4;
    g.k = 2;
    std::vector<double> x(4), w(2), y(3);
    CHECK_THROWS_AS(conv1d_forward_serial(g, x, w, {}, y), ShapeError);
  }

  TEST_CASE("affine composition is associative") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
      const Affine s1{u(rng), u(rng)}, s2{u(rng), u(rng)}, s3{u(rng), u(rng)};
      const Affine left = compose(compose(s1, s2), s3);
      const Affine right = compose(s1, compose(s2, s3));
      CHECK(std::abs(left.a - right.a) <= 1e-14);
      CHECK(std::abs(left.b - right.b) <= 1e-14);
    }
  }

  TEST_CASE("blelloch exclusive scan matches a sequential exclusive fold") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (std::size_t n : {1, 2, 3, 5, 8, 13, 64, 100}) {
      std::vector<Affine> items(n);
      for (Affine& f : items) f = {u(rng), u(rng)};
      std::vector<Affine> expect(n);
      Affine acc{};
      for (std::size_t i = 0; i < n; ++i) {
        expect[i] = acc;
        acc = compose(acc, items[i]);
      }
      blelloch_exclusive_scan(items);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(items[i].a - expect[i].a) <= 1e-14);
        CHECK(std::abs(items[i].b - expect[i].b) <= 1e-14);
      }
    }
  }

  TEST_CASE("parallel affine scan matches the serial fold in both directions") {
    std::mt19937_64 rng(25);
    const std::size_t lanes = 5;
    for (std::size_t steps : {1, 2, 255, 256, 257, 1000})
      for (std::size_t chunk : {std::size_t{1}, std::size_t{7}, kScanChunk})
        for (Direction dir : {Direction::kForward, Direction::kReverse}) {
          const auto a = random_vec(lanes * steps, rng, 0.0, 1.0);
          const auto b = random_vec(lanes * steps, rng, -3.0, 3.0);
          const auto h0 = random_vec(lanes, rng);
          std::vector<double> s(lanes * steps), p(lanes * steps);
          affine_scan_serial(a, b, h0, lanes, steps, dir, s);
          affine_scan_parallel(a, b, h0, lanes, steps, dir, p, chunk);
          CHECK(max_diff(s, p) <= 1e-12);
        }
  }

  TEST_CASE("parallel kernels are bit-identical across thread counts") {
    std::mt19937_64 rng(26);
    const std::size_t lanes = 6, steps = 3000;
    const auto a = random_vec(lanes * steps, rng, 0.0, 1.0);
    const auto b = random_vec(lanes * steps, rng);
    const std::vector<double> h0(lanes, 0.25);
    const int saved = omp_get_max_threads();
    std::vector<std::vector<double>> runs;
    for (int threads : {1, 3, 4}) {
      omp_set_num_threads(threads);
      std::vector<double> out(lanes * steps);
      affine_scan_parallel(a, b, h0, lanes, steps, Direction::kForward, out);
      runs.push_back(out);
    }
    omp_set_num_threads(saved);
    CHECK(runs[0] == runs[1]);
    CHECK(runs[0] == runs[2]);
  }

  TEST_CASE("scan rejects bad sizes and chunk") {
    std::vector<double> a(4), b(4), h0(1), out(4);
    CHECK_THROWS_AS(affine_scan_serial(a, b, h0, 2, 2, Direction::kForward, out), ShapeError);
    CHECK_THROWS_AS(affine_scan_parallel(a, b, h0, 1, 4, Direction::kForward, out, 0), DomainError);
  }
}
