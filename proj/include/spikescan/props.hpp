#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spikescan/dsn.hpp"
#include "spikescan/lif.hpp"
#include "spikescan/neuron.hpp"

namespace spikescan {

// A single-lane neuron driven one input at a time, exposing the pre-reset
// membrane H_t. All checkers speak to neurons through this interface, and
// every witness is replayed through it.
class ControlSubject {
 public:
  virtual ~ControlSubject() = default;
  virtual std::string name() const = 0;
  virtual double v_th() const = 0;
  virtual void reset() = 0;
  virtual double step(double x) = 0;
  virtual std::unique_ptr<ControlSubject> clone() const = 0;
  // Upper bound on H_t claimed for inputs bounded by c > 0, if any.
  virtual std::optional<double> long_bound(double c) const = 0;
};

// LIF/IF through lif_step on 1 x 1 tensors.
std::unique_ptr<ControlSubject> make_lif_subject(const NeuronConfig& cfg);
// DSN (1 channel) through dsn_step.
std::unique_ptr<ControlSubject> make_dsn_subject(const DsnParams& params);

// H_t = alpha_t H_{t-1} + (1 - alpha_t) x_t where alpha_t is `base_alpha`
// except when H_{t-1} >= v_th > x_t, where it is alpha_window_condition
// scaled by (1 - margin). The decay policy that the window condition says
// always yields Delta-short control.
std::unique_ptr<ControlSubject> make_window_policy_subject(double v_th, double base_alpha, double margin = 1e-6);

// Builds a subject by name: if-hard, if-soft, if-none, lif-hard, lif-soft,
// lif-none (tau_m = 2), dsn (random 1-channel params from `seed`),
// dsn-policy (window policy, base alpha 0.5).
std::unique_ptr<ControlSubject> make_subject(const std::string& name, std::uint64_t seed = 0);
std::vector<std::string> subject_names();

struct Witness {
  std::vector<double> inputs;
  std::vector<double> h;       // pre-reset membrane for every input
  std::size_t violated_step;   // index into inputs / h
  double limit;                // the bound that was crossed
  bool inclusive;              // violation when h >= limit (else h > limit)
  std::string note;
};

struct ControlVerdict {
  std::string subject;
  std::string property;
  bool holds = true;
  std::size_t trials = 0;
  std::optional<Witness> witness;
  double observed_max = 0.0;  // largest H seen (long control)
};

struct ShortControlOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  double boundary_eps = 1e-9;      // boundary inputs sit at (v_th / delta)(1 - eps)
  double max_log10_target = 6.0;   // random H_{t-Delta} log-uniform in [v_th, 10^this v_th]
  int escalation_decades = 30;     // deterministic bursts at v_th 10^k, k = 0..this
};

// Samples H_{t-Delta} >= v_th followed by Delta inputs < v_th / Delta and
// asserts H_t < v_th (ties count as violations). Deterministic cases:
// H_{t-Delta} at v_th and 10 v_th with inputs at (v_th / Delta)(1 - eps),
// plus escalating bursts; then `trials` random cases with a random preamble.
ControlVerdict check_short_control(const ControlSubject& subject, std::size_t delta, const ShortControlOptions& opt = {});

struct LongControlOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::size_t horizon = 100000;        // steps of the adversarial constant input
  double divergence_factor = 1e4;      // unbounded once H > factor * v_th
  double rounding_slack = 1e-12;       // relative slack on the claimed bound
};

// Random inputs in [-c, c] of length `steps`, plus the constant input c for
// opt.horizon steps. Fails when H exceeds the subject's claimed bound, or,
// for any subject, when H exceeds divergence_factor * v_th.
ControlVerdict check_long_control(const ControlSubject& subject, double c_bound, std::size_t steps,
                                  const LongControlOptions& opt = {});

// Re-runs the witness inputs from rest and confirms the recorded trace and
// violation. Throws DomainError when the verdict carries no witness.
bool replay_witness(const ControlSubject& subject, const Witness& witness);

// Smallest Delta in [1, max_delta] for which short control holds.
std::optional<std::size_t> search_short_control(const ControlSubject& subject, std::size_t max_delta,
                                                const ShortControlOptions& opt);

// Soft-reset IF: a burst X_1 = (Delta + 1) v_th - sum(small) + margin v_th
// followed by the small inputs, each < v_th / Delta. Throws DomainError
// otherwise.
std::vector<double> construct_soft_reset_counterexample(std::size_t delta, double v_th,
                                                        const std::vector<double>& small_inputs,
                                                        double margin = 0.1);

// Soft-reset LIF: the burst realising
//   H_{t-Delta} = sum_{i=0..Delta} beta^-i v_th
//               + sum_{i=1..Delta} beta^-(i-1) (1 - 1/beta) X_{t-Delta+i}
// scaled by (1 + margin), followed by the small inputs. Needs 0 < beta < 1.
std::vector<double> construct_lif_soft_reset_counterexample(const NeuronConfig& cfg, std::size_t delta,
                                                            const std::vector<double>& small_inputs,
                                                            double margin = 0.01);

// (v_th - x_t) / (h_prev - x_t): any alpha_t strictly below it gives
// H_t < v_th. Needs h_prev >= v_th > x_t; throws DomainError otherwise.
double alpha_window_condition(double h_prev, double x_t, double v_th);

// Decays realising an influence of exactly `tau` steps for a membrane h_prev
// >= v_th followed by inputs xs (all < v_th), tau in [1, xs.size()]: alpha at
// or above the window condition for the first tau - 1 inputs, below it at
// input tau, `after` for the rest.
std::vector<double> alpha_duration_schedule(double h_prev, const std::vector<double>& xs, double v_th,
                                            std::size_t tau, double after = 0.5);

// Membrane trace H_1..H_n of the recurrence with explicit decays from h_prev.
std::vector<double> replay_decay_schedule(double h_prev, const std::vector<double>& xs,
                                          const std::vector<double>& alphas);

struct ConditionsRow {
  std::string neuron;
  bool condition1 = false;  // prefix summarizability
  bool condition2 = false;  // online updatability
  bool condition3 = false;  // offline parallelizability
  std::string detail;
};

// Condition 1: causality (outputs on a prefix ignore the suffix) and time
// invariance (a zero-padded delay of the input delays the membrane).
// Condition 2: a stepper exists and its state size does not grow with t.
// Condition 3: a parallel path exists and matches the reference evaluation.
ConditionsRow check_conditions_table(const Neuron& neuron, std::uint64_t seed = 0, std::size_t trials = 8);

// Neurons for the conditions table by name: lif (hard reset), lif-hard,
// lif-soft, psn, masked-psn (T = 24, band 4), sliding-psn (4 taps), dsn,
// dsn-enhanced (2 channels, k = 4). Parameters are drawn from `seed`.
std::unique_ptr<Neuron> make_table_neuron(const std::string& name, std::uint64_t seed = 0);
std::vector<std::string> table_neuron_names();

// Expected conditions-table rows for the implemented neurons: lif, psn, masked-psn,
// sliding-psn, dsn. Empty for other names.
std::optional<ConditionsRow> expected_conditions_row(const std::string& neuron);

// Delta + m / Delta - m >= 1 for 1 <= m <= Delta <= max_delta, checked in
// integers as Delta^2 + m - m Delta >= Delta. Returns the number of pairs
// checked; throws DomainError at the first failing pair.
std::size_t check_soft_reset_lemma(std::size_t max_delta = 64);

// Expected verdict for the named subject and property ("short-control",
// "long-control"), when there is one to compare against.
std::optional<bool> expected_control(const std::string& subject, const std::string& property);

std::string to_json(const ControlVerdict& verdict);
std::string to_json(const ConditionsRow& row, const std::optional<ConditionsRow>& expected);

}  // namespace spikescan
