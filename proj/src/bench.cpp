#include "spikescan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <malloc.h>
#include <memory>
#include <random>
#include <sstream>

#include "spikescan/dsn.hpp"
#include "spikescan/error.hpp"
#include "spikescan/kernels/psn.hpp"
#include "spikescan/lif.hpp"
#include "spikescan/ops.hpp"

namespace spikescan {

namespace {

const std::vector<std::string> kBenchNeurons{"dsn", "lif", "psn", "sliding-psn"};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = u(rng);
  return t;
}

double span_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// One timed pass: forward() then backward(), each returning a checksum term.
struct Pass {
  std::function<double()> forward;
  std::function<double()> backward;
};

Pass make_pass(const std::string& neuron, const BenchConfig& cfg, std::size_t steps, std::mt19937_64& rng) {
  const std::size_t b = cfg.batch, c = cfg.channels;
  auto x = std::make_shared<Tensor>(random_tensor(Shape{b, c, steps}, rng, -1.0, 3.0));
  if (neuron == "dsn" || neuron == "lif") {
    struct Taped {
      std::unique_ptr<Tape> tape;
      Var root, input;
    };
    auto st = std::make_shared<Taped>();
    auto params = std::make_shared<DsnParams>(DsnParams::init(c, 4, rng));
    const bool dsn = neuron == "dsn";
    Pass p;
    p.forward = [=] {
      st->tape = std::make_unique<Tape>();
      Tape& tape = *st->tape;
      st->input = tape.leaf(*x);
      Var s;
      if (dsn) {
        const DsnVars vars = DsnVars::leaves(tape, *params);
        s = dsn_forward(st->input, vars, *params, ArcTangent{}).s;
      } else {
        s = lif_forward(st->input, NeuronConfig::lif(2.0, ResetMode::kHard), ArcTangent{});
      }
      st->root = sum(s);
      return st->root.value()[0];
    };
    p.backward = [=] {
      st->tape->backward(st->root);
      return st->input.grad().sum();
    };
    return p;
  }
  const bool dense = neuron == "psn";
  const std::size_t lanes = b * c, taps = dense ? steps * steps : 32;
  auto w = std::make_shared<std::vector<double>>(taps);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : *w) v = u(rng);
  auto h = std::make_shared<std::vector<double>>(lanes * steps);
  auto dx = std::make_shared<std::vector<double>>(lanes * steps);
  auto dw = std::make_shared<std::vector<double>>(taps);
  Pass p;
  p.forward = [=] {
    if (dense)
      kernels::psn_dense_forward_parallel(lanes, steps, *w, x->data(), *h);
    else
      kernels::psn_sliding_forward_parallel(lanes, steps, *w, x->data(), *h);
    return span_sum(*h);
  };
  // dH = 1, the gradient of sum(H).
  p.backward = [=] {
    const std::vector<double> ones(lanes * steps, 1.0);
    if (dense)
      kernels::psn_dense_backward_parallel(lanes, steps, *w, x->data(), ones, *dx, *dw);
    else
      kernels::psn_sliding_backward_parallel(lanes, steps, *w, x->data(), ones, *dx, *dw);
    return span_sum(*dx);
  };
  return p;
}

}  // namespace

void BenchConfig::validate() const {
  if (neurons.empty() || lengths.empty()) throw DomainError("bench: need at least one neuron and one length");
  for (const std::string& n : neurons)
    if (std::find(kBenchNeurons.begin(), kBenchNeurons.end(), n) == kBenchNeurons.end())
      throw DomainError("bench: unknown neuron '" + n + "'");
  if (!std::is_sorted(lengths.begin(), lengths.end()) || lengths.front() == 0)
    throw DomainError("bench: lengths must be positive and ascending");
  if (batch == 0 || channels == 0 || reps == 0) throw DomainError("bench: batch, channels and reps must be positive");
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  cfg.validate();
  // Freed tensors stay in the heap, so repeated passes do not page-fault on
  // fresh mappings.
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  std::vector<BenchRow> rows;
  for (const std::string& neuron : cfg.neurons)
    for (std::size_t steps : cfg.lengths) {
      std::mt19937_64 rng(cfg.seed ^ (steps * 0x9e3779b97f4a7c15ULL));
      Pass pass = make_pass(neuron, cfg, steps, rng);
      BenchRow row;
      row.neuron = neuron;
      row.length = steps;
      for (std::size_t i = 0; i < cfg.warmup; ++i) {
        pass.forward();
        pass.backward();
      }
      std::vector<double> fwd, bwd;
      for (std::size_t i = 0; i < cfg.reps; ++i) {
        auto t0 = Clock::now();
        const double f = pass.forward();
        fwd.push_back(ms_since(t0));
        t0 = Clock::now();
        const double g = pass.backward();
        bwd.push_back(ms_since(t0));
        if (i == 0) row.checksum = f + g;
      }
      row.fwd_ms = mean(fwd);
      row.bwd_ms = mean(bwd);
      row.fwd_median_ms = median(fwd);
      row.bwd_median_ms = median(bwd);
      rows.push_back(row);
    }
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need two or more paired points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("loglog_slope: lengths must differ");
  return sxy / sxx;
}

std::vector<std::pair<std::string, double>> bench_slopes(const std::vector<BenchRow>& rows) {
  std::vector<std::string> order;
  for (const BenchRow& r : rows)
    if (std::find(order.begin(), order.end(), r.neuron) == order.end()) order.push_back(r.neuron);
  std::vector<std::pair<std::string, double>> out;
  for (const std::string& n : order) {
    std::vector<double> x, y;
    for (const BenchRow& r : rows)
      if (r.neuron == n) {
        x.push_back(static_cast<double>(r.length));
        y.push_back(r.total_ms());
      }
    if (x.size() >= 2) out.emplace_back(n, loglog_slope(x, y));
  }
  return out;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.precision(6);
  os << "neuron,length,fwd_ms,bwd_ms,fwd_median_ms,bwd_median_ms\n";
  for (const BenchRow& r : rows)
    os << r.neuron << ',' << r.length << ',' << r.fwd_ms << ',' << r.bwd_ms << ',' << r.fwd_median_ms << ','
       << r.bwd_median_ms << '\n';
  return os.str();
}

std::string bench_checksum_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "neuron,length,checksum\n";
  for (const BenchRow& r : rows) os << r.neuron << ',' << r.length << ',' << r.checksum << '\n';
  return os.str();
}

}  // namespace spikescan
