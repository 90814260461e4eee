#include <cmath>
#include <random>

#include "doctest.h"
#include "spikescan/gradcheck.hpp"
#include "spikescan/ops.hpp"
#include "spikescan/scan.hpp"

using namespace spikescan;

namespace {

Tensor uniform(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

ScanProblem random_problem(std::size_t b, std::size_t c, std::size_t t, std::mt19937_64& rng,
                           double a_lo = 0.0, double a_hi = 1.0, double x_mag = 1.0) {
  return ScanProblem(uniform(Shape{b, c, t}, rng, a_lo, a_hi), uniform(Shape{b, c, t}, rng, -x_mag, x_mag),
                     uniform(Shape{b, c}, rng, -1.0, 1.0));
}

}  // namespace

TEST_SUITE("scan") {
  TEST_CASE("serial scan closed forms") {
    std::mt19937_64 rng(31);
    const Tensor x = uniform(Shape{2, 3, 10}, rng, -2, 2);
    const Tensor h0 = uniform(Shape{2, 3}, rng, -1, 1);

    const Tensor carry = scan_serial(ScanProblem(Tensor(x.shape(), 1.0), x, h0));
    for (std::size_t lane = 0; lane < 6; ++lane)
      for (std::size_t t = 0; t < 10; ++t) CHECK(carry[lane * 10 + t] == h0[lane]);

    const Tensor input = scan_serial(ScanProblem(Tensor(x.shape(), 0.0), x, h0));
    CHECK(input.max_abs_diff(x) == 0.0);

    // Constant decay: the linear expansion sum_i beta^(t-i) (1 - beta) x_i.
    const double beta = 0.6;
    const Tensor h = scan_serial(ScanProblem(Tensor(x.shape(), beta), x));
    for (std::size_t lane = 0; lane < 6; ++lane)
      for (std::size_t t = 0; t < 10; ++t) {
        double expect = 0.0;
        for (std::size_t i = 0; i <= t; ++i) expect += std::pow(beta, double(t - i)) * (1 - beta) * x[lane * 10 + i];
        CHECK(h[lane * 10 + t] == doctest::Approx(expect).epsilon(1e-13));
      }
  }

  TEST_CASE("parallel scan equals serial") {
    std::mt19937_64 rng(32);
    const ScanProblem one = random_problem(1, 1, 1, rng);
    const double expect = one.alpha[0] * one.h0[0] + (1 - one.alpha[0]) * one.x[0];
    CHECK(scan_parallel(one)[0] == expect);

    for (std::size_t t : {1, 2, 3, 255, 256, 257, 1024}) {
      const ScanProblem p = random_problem(4, 8, t, rng);
      CHECK(scan_parallel(p).max_abs_diff(scan_serial(p)) <= 1e-10);
    }
  }

  TEST_CASE("parallel scan equals serial across the stated domain") {
    std::mt19937_64 rng(33);
    for (std::size_t t : {std::size_t{1} << 10, std::size_t{1} << 14}) {
      const ScanProblem p = random_problem(1, 2, t, rng, 1e-9, 1.0 - 1e-9, 1e4);
      CHECK(scan_parallel(p).max_abs_diff(scan_serial(p)) <= 1e-10);
    }
  }

  TEST_CASE("parallel scan is deterministic") {
    std::mt19937_64 rng(34);
    const ScanProblem p = random_problem(2, 3, 2000, rng);
    CHECK(scan_parallel(p).vec() == scan_parallel(p).vec());
  }

  TEST_CASE("scan_backward closed forms") {
    std::mt19937_64 rng(35);
    const ScanProblem p = random_problem(2, 2, 6, rng);
    const Tensor h = scan_serial(p);
    const ScanGrads zero = scan_backward(p, h, Tensor(h.shape(), 0.0));
    CHECK(zero.d_alpha.sum() == 0.0);
    CHECK(zero.d_x.sum() == 0.0);
    CHECK(zero.d_h0.sum() == 0.0);

    const ScanProblem single = random_problem(1, 1, 1, rng);
    const Tensor dh = Tensor(Shape{1, 1, 1}, 0.7);
    const ScanGrads g = scan_backward(single, scan_serial(single), dh);
    CHECK(g.d_alpha[0] == doctest::Approx(0.7 * (single.h0[0] - single.x[0])));
    CHECK(g.d_x[0] == doctest::Approx(0.7 * (1 - single.alpha[0])));
    CHECK(g.d_h0[0] == doctest::Approx(0.7 * single.alpha[0]));
  }

  TEST_CASE("scan_backward matches finite differences") {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 10; ++trial) {
      for (Execution exec : {Execution::kSerial, Execution::kParallel}) {
        const std::size_t t = 1 + rng() % 256;
        const ScanProblem p = random_problem(1, 2, t, rng, 0.05, 0.95);
        const Tensor weights = uniform(p.x.shape(), rng, -1, 1);
        const Tensor inputs[] = {p.alpha, p.x};
        const Tensor h0 = p.h0;
        const double err = grad_check(
            [&](Tape& tape, std::span<const Var> v) {
              return sum(mul(scan(v[0], v[1], h0, exec), tape.constant(weights)));
            },
            inputs, 1e-6);
        CHECK(err <= 1e-5);
      }
    }
  }

  TEST_CASE("scan_backward h0 gradient matches finite differences") {
    std::mt19937_64 rng(37);
    const ScanProblem p = random_problem(2, 2, 40, rng, 0.05, 0.95);
    const Tensor dh = uniform(p.x.shape(), rng, -1, 1);
    const ScanGrads g = scan_backward(p, scan_serial(p), dh);
    auto objective = [&](const Tensor& h0) {
      const Tensor h = scan_serial(ScanProblem(p.alpha, p.x, h0));
      double acc = 0.0;
      for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * dh[i];
      return acc;
    };
    for (std::size_t lane = 0; lane < 4; ++lane) {
      Tensor up = p.h0, down = p.h0;
      up[lane] += 1e-6;
      down[lane] -= 1e-6;
      CHECK(g.d_h0[lane] == doctest::Approx((objective(up) - objective(down)) / 2e-6).epsilon(1e-6));
    }
  }

  TEST_CASE("matrix form equals serial inside the guard band") {
    std::mt19937_64 rng(38);
    for (std::size_t t : {1, 8, 32, 64}) {
      const ScanProblem p = random_problem(2, 3, t, rng, 0.1, 0.9);
      CHECK(matrix_form(p).max_abs_diff(scan_serial(p)) <= 1e-8);
    }
  }

  TEST_CASE("transition matrix is upper-triangular with the product weights") {
    std::mt19937_64 rng(39);
    const Tensor alpha = uniform(Shape{12}, rng, 0.1, 0.9);
    const Tensor w = transition_matrix(alpha.data());
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) {
        if (j < i) {
          CHECK(w.at(i, j) == 0.0);
          continue;
        }
        double expect = 1.0 - alpha[i];
        for (std::size_t k = i + 1; k <= j; ++k) expect *= alpha[k];
        CHECK(w.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
      }
  }

  TEST_CASE("matrix form guard band") {
    std::mt19937_64 rng(40);
    const ScanProblem tiny = random_problem(1, 1, 256, rng, 1e-4, 1e-3);
    CHECK_THROWS_AS(matrix_form(tiny), StabilityGuard);
    const ScanProblem long_seq = random_problem(1, 1, 513, rng, 0.4, 0.6);
    CHECK_THROWS_AS(matrix_form(long_seq), StabilityGuard);
    const ScanProblem edge = random_problem(1, 1, 16, rng, 0.96, 0.99);
    CHECK_THROWS_AS(matrix_form(edge), StabilityGuard);
    // 512 steps of alpha = 0.1 underflow the running product.
    CHECK_THROWS_AS(transition_matrix(Tensor(Shape{512}, 0.1).data()), StabilityGuard);
    CHECK_THROWS_AS(transition_matrix(Tensor(Shape{4}, 0.5).data(), 0.01), DomainError);
  }

  TEST_CASE("scan rejects mismatched shapes") {
    CHECK_THROWS_AS(ScanProblem(Tensor(Shape{1, 2, 3}), Tensor(Shape{1, 2, 4})), ShapeError);
    CHECK_THROWS_AS(ScanProblem(Tensor(Shape{1, 2, 3}), Tensor(Shape{1, 2, 3}), Tensor(Shape{2, 1})), ShapeError);
  }
}
