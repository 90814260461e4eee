// Serial reference vs OpenMP kernels, then the DSN / full-PSN scaling run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include <omp.h>

#include "spikescan/bench.hpp"
#include "spikescan/kernels/conv.hpp"
#include "spikescan/kernels/gemm.hpp"
#include "spikescan/kernels/psn.hpp"
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

double best_ms(const std::function<void()>& f, int reps = 5) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void report(const char* name, const std::function<void()>& serial, const std::function<void()>& parallel,
            const std::vector<double>& out_s, const std::vector<double>& out_p) {
  const double ts = best_ms(serial), tp = best_ms(parallel);
  std::printf("%-16s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  max|diff| %.3g\n", name, ts, tp, ts / tp,
              max_diff(out_s, out_p));
}

}  // namespace

int main() {
  std::mt19937_64 rng(0);
  std::printf("threads: %d\n", omp_get_max_threads());

  {
    const std::size_t lanes = 64, steps = 8192;
    const auto a = random_vec(lanes * steps, rng, 0.1, 0.99), b = random_vec(lanes * steps, rng);
    const std::vector<double> h0(lanes, 0.0);
    std::vector<double> s(lanes * steps), p(lanes * steps);
    report("affine_scan", [&] { affine_scan_serial(a, b, h0, lanes, steps, Direction::kForward, s); },
           [&] { affine_scan_parallel(a, b, h0, lanes, steps, Direction::kForward, p); }, s, p);
  }
  {
    ConvGeometry g{.batch = 8, .c_in = 64, .c_out = 64, .steps = 1024, .k = 3, .pad_left = 2};
    const auto x = random_vec(g.batch * g.c_in * g.steps, rng), w = random_vec(g.weight_size(), rng);
    const auto bias = random_vec(g.c_out, rng);
    std::vector<double> s(g.batch * g.c_out * g.steps), p(s.size());
    report("conv1d", [&] { conv1d_forward_serial(g, x, w, bias, s); },
           [&] { conv1d_forward_parallel(g, x, w, bias, p); }, s, p);
  }
  {
    const std::size_t m = 256, n = 256, k = 256;
    const auto a = random_vec(m * k, rng), b = random_vec(k * n, rng);
    std::vector<double> s(m * n), p(m * n);
    report("gemm", [&] { gemm_serial(Trans::kNo, Trans::kNo, m, n, k, a, b, s); },
           [&] { gemm_parallel(Trans::kNo, Trans::kNo, m, n, k, a, b, p); }, s, p);
  }
  {
    const std::size_t lanes = 64, steps = 1024;
    const auto w = random_vec(steps * steps, rng), x = random_vec(lanes * steps, rng);
    std::vector<double> s(lanes * steps), p(lanes * steps);
    report("psn_dense", [&] { psn_dense_forward_serial(lanes, steps, w, x, s); },
           [&] { psn_dense_forward_parallel(lanes, steps, w, x, p); }, s, p);
    const auto taps = random_vec(32, rng);
    report("psn_sliding", [&] { psn_sliding_forward_serial(lanes, steps, taps, x, s); },
           [&] { psn_sliding_forward_parallel(lanes, steps, taps, x, p); }, s, p);
  }

  BenchConfig cfg;
  cfg.batch = 1;
  cfg.channels = 16;
  cfg.reps = 3;
  cfg.warmup = 1;
  const auto rows = run_bench(cfg);
  std::printf("\n%s", bench_csv(rows).c_str());
  for (const auto& [neuron, slope] : bench_slopes(rows)) std::printf("slope %s %.3f\n", neuron.c_str(), slope);
  return 0;
}
