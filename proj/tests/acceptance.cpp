// One PASS/FAIL line per acceptance criterion. Arguments select criteria
// by number; no arguments runs all ten. Exit status is the failure count.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "spikescan/bench.hpp"
#include "spikescan/dsn.hpp"
#include "spikescan/energy.hpp"
#include "spikescan/error.hpp"
#include "spikescan/gradcheck.hpp"
#include "spikescan/ops.hpp"
#include "spikescan/props.hpp"
#include "spikescan/scan.hpp"
#include "spikescan/tasks.hpp"

using namespace spikescan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Appends to the detail line and folds a condition into the verdict.
struct Recorder {
  Outcome out;
  std::ostringstream os;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      out.pass = false;
      os << " [failed: " << what << "]";
    }
  }
  template <class T>
  Recorder& operator<<(const T& v) {
    os << v;
    return *this;
  }
  Outcome done() {
    out.detail = os.str();
    return out;
  }
};

Tensor uniform(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = u(rng);
  return t;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Parallel scan against the serial fold.
Outcome scan_correctness() {
  Recorder r;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t lengths[] = {1, 2, 3, 255, 256, 257, 1024, 8192};
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t t = lengths[i % 8];
    const ScanProblem p(uniform(Shape{4, 8, t}, rng, 0.0, 1.0), uniform(Shape{4, 8, t}, rng, -1.0, 1.0),
                        uniform(Shape{4, 8}, rng, -1.0, 1.0));
    worst = std::max(worst, scan_parallel(p).max_abs_diff(scan_serial(p)));
  }
  const double secs = seconds_since(t0);
  r << "200 instances, max |parallel - serial| = " << worst << ", " << secs << " s";
  r.require(worst <= 1e-10, "diff <= 1e-10");
  r.require(secs < 5.0, "runtime < 5 s");
  return r.done();
}

// 2. Scan backward and the full DSN pipeline against central differences.
Outcome gradient_correctness() {
  Recorder r;
  std::mt19937_64 rng(2);
  double worst_scan = 0.0, worst_dsn = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t t = 1 + rng() % 128;
    const Tensor alpha = uniform(Shape{1, 2, t}, rng, 0.05, 0.95), x = uniform(Shape{1, 2, t}, rng, -1, 1);
    const Tensor h0 = uniform(Shape{1, 2}, rng, -1, 1), weights = uniform(Shape{1, 2, t}, rng, -1, 1);
    const Tensor scan_inputs[] = {alpha, x};
    worst_scan = std::max(worst_scan, grad_check(
                                          [&](Tape& tape, std::span<const Var> v) {
                                            return sum(mul(scan(v[0], v[1], h0), tape.constant(weights)));
                                          },
                                          scan_inputs, 1e-6));

    DsnParams p = DsnParams::init(2, 4, rng);
    p.firing = Firing::kRelaxed;
    p.tau = 0.5;
    const Tensor xd = uniform(Shape{1, 2, t}, rng, -1, 3);
    const Tensor dsn_inputs[] = {xd, p.conv_kernel, p.conv_bias};
    worst_dsn = std::max(worst_dsn, grad_check(
                                        [&](Tape&, std::span<const Var> v) {
                                          const DsnVars vars{v[1], v[2], std::nullopt};
                                          return mean(dsn_forward(v[0], vars, p, ArcTangent{}).s);
                                        },
                                        dsn_inputs, 1e-6));
  }
  r << "50 instances, max rel err: scan " << worst_scan << ", dsn " << worst_dsn;
  r.require(worst_scan <= 1e-5 && worst_dsn <= 1e-5, "rel err <= 1e-5");
  return r.done();
}

// 3. Matrix form inside the guard band, StabilityGuard outside it.
Outcome matrix_oracle() {
  Recorder r;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (std::size_t t = 1; t <= 64; ++t) {
    const ScanProblem p(uniform(Shape{2, 2, t}, rng, 0.1, 0.9), uniform(Shape{2, 2, t}, rng, -1, 1),
                        uniform(Shape{2, 2}, rng, -1, 1));
    worst = std::max(worst, matrix_form(p).max_abs_diff(scan_serial(p)));
  }
  auto guards = [&](Tensor alpha) {
    try {
      matrix_form(ScanProblem(alpha, uniform(alpha.shape(), rng, -1, 1)));
    } catch (const StabilityGuard&) {
      return true;
    }
    return false;
  };
  const bool low = guards(uniform(Shape{1, 1, 32}, rng, 1e-4, 1e-2));
  const bool high = guards(uniform(Shape{1, 1, 32}, rng, 0.96, 0.999));
  const bool long_seq = guards(uniform(Shape{1, 1, 513}, rng, 0.4, 0.6));
  const auto yn = [](bool b) { return b ? "yes" : "no"; };
  r << "T = 1..64 max diff " << worst << "; guard fires for small alpha " << yn(low) << ", alpha near 1 " << yn(high)
    << ", T = 513 " << yn(long_seq);
  r.require(worst <= 1e-8, "diff <= 1e-8");
  r.require(low && high && long_seq, "guard fires outside the band");
  return r.done();
}

// 4. Reset properties.
Outcome property_suite() {
  Recorder r;
  ShortControlOptions sopt;
  sopt.trials = 10000;
  LongControlOptions lopt;
  lopt.trials = 10000;
  const std::size_t steps = 200;

  for (const char* name : {"if-hard", "lif-hard"}) {
    const auto s = make_subject(name);
    for (std::size_t delta : {1, 8}) {
      const ControlVerdict v = check_short_control(*s, delta, sopt);
      r.require(v.holds, std::string(name) + " short control, delta " + std::to_string(delta));
    }
    const ControlVerdict l = check_long_control(*s, 2.0, steps, lopt);
    r.require(l.holds, std::string(name) + " long control");
  }
  r << "hard IF/LIF hold short (delta 1, 8) and long control over 10k trials; ";

  {
    const auto s = make_subject("if-soft");
    const std::size_t delta = 4;
    const auto inputs = construct_soft_reset_counterexample(delta, 1.0, {0.2, 0.1, 0.0, 0.24});
    auto probe = s->clone();
    probe->reset();
    double h = 0.0;
    for (double x : inputs) h = probe->step(x);
    r.require(h >= 1.0, "soft IF counterexample keeps H_t >= v_th");
    const ControlVerdict sv = check_short_control(*s, delta, sopt);
    r.require(!sv.holds && sv.witness && replay_witness(*s, *sv.witness), "soft IF short control fails with a witness");
    LongControlOptions div = lopt;
    div.horizon = 100000;
    const ControlVerdict lv = check_long_control(*s, 2.0, steps, div);
    r.require(!lv.holds && lv.witness && lv.witness->violated_step < 100000, "soft IF diverges within 1e5 steps");
    r << "soft IF counterexample H_t = " << h << ", diverges at step "
      << (lv.witness ? lv.witness->violated_step + 1 : 0) << "; ";
  }
  {
    const auto s = make_subject("lif-soft");
    const ControlVerdict lv = check_long_control(*s, 2.0, steps, lopt);
    r.require(lv.holds, "soft LIF long control (bound C)");
    const ControlVerdict sv = check_short_control(*s, 4, sopt);
    r.require(!sv.holds, "soft LIF short control fails");
    const auto burst = construct_lif_soft_reset_counterexample(NeuronConfig::lif(2.0, ResetMode::kSoft), 4,
                                                               {0.2, 0.1, 0.0, 0.24});
    auto probe = s->clone();
    probe->reset();
    double h = 0.0;
    for (double x : burst) h = probe->step(x);
    r.require(h >= 1.0, "soft LIF constructed counterexample");
    r << "soft LIF long max H " << lv.observed_max << ", short fails; ";
  }
  {
    const auto s = make_subject("dsn", 4);
    const ControlVerdict lv = check_long_control(*s, 2.0, steps, lopt);
    r.require(lv.holds, "DSN long control, bound max(0, sup x)");
    const auto policy = make_subject("dsn-policy");
    bool all = true;
    for (std::size_t delta : {1, 2, 4, 8, 16, 32, 64}) all = all && check_short_control(*policy, delta, sopt).holds;
    r.require(all, "DSN under the alpha window condition holds short control");
    r << "DSN long max H " << lv.observed_max << " (C = 2), window-condition DSN holds delta 1..64";
  }
  return r.done();
}

// 5. Conditions-table rows.
Outcome conditions_table() {
  Recorder r;
  for (const char* name : {"lif", "psn", "masked-psn", "sliding-psn", "dsn"}) {
    const ConditionsRow row = check_conditions_table(*make_table_neuron(name, 5), 5);
    const auto expect = expected_conditions_row(name);
    const bool ok = expect && row.condition1 == expect->condition1 && row.condition2 == expect->condition2 &&
                    row.condition3 == expect->condition3;
    r << name << " " << (row.condition1 ? "Y" : "N") << (row.condition2 ? "Y" : "N") << (row.condition3 ? "Y" : "N")
      << (ok ? "" : " (mismatch)") << "; ";
    r.require(ok, std::string(name) + " row");
  }
  return r.done();
}

// 6. Runtime scaling of DSN forward+backward against full PSN evaluation.
Outcome efficiency_scaling() {
  Recorder r;
  const auto t0 = std::chrono::steady_clock::now();
  BenchConfig cfg;
  cfg.batch = 1;
  cfg.channels = 16;
  cfg.neurons = {"dsn"};
  cfg.reps = 20;
  const auto dsn = run_bench(cfg);
  cfg.neurons = {"psn"};
  cfg.reps = 3;
  cfg.warmup = 1;
  const auto psn = run_bench(cfg);
  const double s_dsn = bench_slopes(dsn).front().second, s_psn = bench_slopes(psn).front().second;
  const double ratio = psn.back().total_ms() / dsn.back().total_ms();
  const double secs = seconds_since(t0);
  r << "slopes dsn " << s_dsn << ", psn " << s_psn << "; T=8192 psn/dsn time " << ratio << "x; " << secs << " s";
  r.require(s_dsn <= 1.3, "dsn slope <= 1.3");
  r.require(s_psn >= 1.7, "psn slope >= 1.7");
  r.require(ratio >= 5.0, "dsn >= 5x faster at 8k");
  r.require(secs < 600.0, "runtime < 10 min");
  return r.done();
}

// 7. Serial extrapolation from T = 256.
Outcome extrapolation() {
  Recorder r;
  const ExtrapolationConfig cfg;
  const ExtrapolationResult dsn = run_extrapolation(NeuronKind::kDsn, 256, {256, 4096}, cfg);
  const double ratio = dsn.points.back().loss / dsn.train_mode_loss;
  r << "dsn loss T=256 " << dsn.train_mode_loss << ", T=4096 " << dsn.points.back().loss << " (ratio " << ratio
    << "); ";
  r.require(std::isfinite(ratio) && ratio <= 2.0, "dsn ratio <= 2");
  ExtrapolationConfig quick = cfg;
  quick.train.epochs = 1;
  for (NeuronKind kind : {NeuronKind::kPsn, NeuronKind::kMaskedPsn}) {
    int refused = 0;
    for (std::size_t t : {128, 512, 4096}) {
      try {
        run_extrapolation(kind, 256, {t}, quick);
      } catch (const LengthMismatch&) {
        ++refused;
      }
    }
    r << to_string(kind) << " refused " << refused << "/3 lengths; ";
    r.require(refused == 3, to_string(kind) + " raises LengthMismatch");
  }
  return r.done();
}

// 8. Desk-scale approximation on Dataset A.
Outcome approximation() {
  Recorder r;
  const auto t0 = std::chrono::steady_clock::now();
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 0;
  const Dataset data = approx_dataset("a", Scale::kDesk, 0);
  const ApproxResult binary = run_approx_experiment("a", data, approx_targets(), cfg);
  const ApproxResult integer = run_approx_experiment("a", data, integer_approx_targets(), cfg);
  const double secs = seconds_since(t0);
  r << "binary average " << 100.0 * binary.average << "% (channel 1 " << 100.0 * binary.accuracy[0]
    << "%, epoch 5 " << 100.0 * binary.per_epoch[5].test_accuracy << "%); integer average "
    << 100.0 * integer.average << "% exact; " << secs << " s";
  const bool primary = binary.average >= 0.90;
  const bool fallback = binary.average >= binary.per_epoch[5].test_accuracy + 0.05 && binary.accuracy[0] >= 0.95;
  r.require(primary || fallback, "binary average >= 90% (or the fallback)");
  r.require(integer.average >= 0.95, "integer average >= 95%");
  r.require(secs < 1200.0, "runtime < 20 min");
  return r.done();
}

// 9. Energy totals and neuron FLOPs.
Outcome energy() {
  Recorder r;
  bool flops_ok = true;
  for (std::size_t c : {128, 4096})
    for (std::size_t t : {1, 32, 100}) {
      const double cd = static_cast<double>(c), td = static_cast<double>(t);
      flops_ok = flops_ok && count_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kLif, c, t)) == cd * td;
      flops_ok = flops_ok && count_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kPsn, c, t)) == cd * td * td;
      flops_ok = flops_ok &&
                 count_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kSlidingPsn, c, t)) == 0.5 * cd * td * td;
      const NeuronFlops d = neuron_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kDsn, c, t, 4));
      flops_ok = flops_ok && d.conv == 4 * cd * td && d.sigmoid == cd * td && d.update == cd * td;
    }
  r.require(flops_ok, "neuron FLOPs formulas");
  double worst = 0.0;
  for (EnergyNeuron n : {EnergyNeuron::kLif, EnergyNeuron::kPsn, EnergyNeuron::kSlidingPsn, EnergyNeuron::kDsn}) {
    const EnergyReport rep = estimate_energy(scifar_architecture(n, 10), published_firing_rates(n, 10), 32,
                                             EnergyProfile::reconciled());
    const double ref = published_energy_mj(n, 10), err = std::abs(rep.total - ref) / ref;
    worst = std::max(worst, err);
    r << to_string(n) << " " << rep.total << " vs " << ref << "; ";
  }
  r << "worst relative error " << worst;
  r.require(worst <= 0.10, "totals within 10%");
  return r.done();
}

// 10. Rerunning CLI manifests reproduces every deterministic output.
Outcome determinism() {
  Recorder r;
  const fs::path root = fs::temp_directory_path() / ("spikescan_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string cli = SPIKESCAN_CLI_PATH;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"props", "props --neuron if-soft --property short-control --delta 4 --trials 2000"},
      {"table", "props --neuron dsn --property conditions-table"},
      {"approx", "approx --dataset b --epochs 2"},
      {"extrapolate", "extrapolate --neuron dsn --train-t 64 --eval-t 64,256 --epochs 2"},
      {"energy", "energy"},
      {"gen", "gen-data --dataset a --n 64 --steps 32"},
      {"pixel", "pixel --neuron dsn --samples 64 --epochs 2"},
      {"bench", "bench --lengths 64,128 --batch 1 --channels 4 --reps 2 --warmup 0"},
  };
  int identical = 0;
  for (const auto& [tag, args] : runs) {
    const fs::path first = root / tag, second = root / (tag + "_rerun");
    const std::string quiet = " > /dev/null 2>&1";
    const int rc1 = std::system((cli + " " + args + " --out " + first.string() + quiet).c_str());
    const int rc2 =
        std::system((cli + " rerun " + (first / "manifest.json").string() + " --check --out " + second.string() + quiet)
                        .c_str());
    const bool ok = rc1 == 0 && rc2 == 0;
    identical += ok;
    r.require(ok, tag + " rerun differs");
  }
  r << identical << "/" << runs.size() << " commands byte-identical on rerun";
  fs::remove_all(root);
  return r.done();
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {1, {"scan correctness", scan_correctness}},
      {2, {"gradient correctness", gradient_correctness}},
      {3, {"matrix-form oracle", matrix_oracle}},
      {4, {"reset property suite", property_suite}},
      {5, {"conditions table", conditions_table}},
      {6, {"efficiency scaling", efficiency_scaling}},
      {7, {"extrapolation", extrapolation}},
      {8, {"approximation (desk scale)", approximation}},
      {9, {"energy reconciliation", energy}},
      {10, {"determinism", determinism}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [n, c] : criteria) selected.push_back(n);
  int failures = 0;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::printf("criterion %d: unknown\n", n);
      ++failures;
      continue;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %-28s %s  %s\n", n, it->second.first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
