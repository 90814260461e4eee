#include "spikescan/props.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"

namespace spikescan {

namespace {

using Json = nlohmann::json;

Tensor lane(double x) { return Tensor(Shape{1, 1}, x); }

class LifSubject final : public ControlSubject {
 public:
  explicit LifSubject(NeuronConfig cfg) : cfg_(cfg), state_(NeuronState::resting(1, 1)) { cfg_.validate(); }
  std::string name() const override {
    return std::string(cfg_.leak == Leak::kIF ? "if-" : "lif-") + to_string(cfg_.reset);
  }
  double v_th() const override { return cfg_.v_th; }
  void reset() override { state_ = NeuronState::resting(1, 1); }
  double step(double x) override {
    LifStep out = lif_step(cfg_, state_, lane(x));
    state_ = std::move(out.state);
    return out.h[0];
  }
  std::unique_ptr<ControlSubject> clone() const override { return std::make_unique<LifSubject>(*this); }
  std::optional<double> long_bound(double c) const override {
    if (cfg_.leak == Leak::kLIF) return cfg_.reset == ResetMode::kHard ? std::max(c, cfg_.v_reset) : c;
    if (cfg_.reset == ResetMode::kHard) return c + std::max(cfg_.v_th, cfg_.v_reset);
    return std::nullopt;
  }

 private:
  NeuronConfig cfg_;
  NeuronState state_;
};

class DsnSubject final : public ControlSubject {
 public:
  explicit DsnSubject(DsnParams params) : params_(std::move(params)), state_(DsnState::zeros(params_, 1)) {
    params_.validate();
    if (params_.channels() != 1) throw DomainError("dsn subject: expected a single channel");
  }
  std::string name() const override { return "dsn"; }
  double v_th() const override { return params_.v_th; }
  void reset() override { state_ = DsnState::zeros(params_, 1); }
  double step(double x) override { return dsn_step(params_, state_, lane(x)).h[0]; }
  std::unique_ptr<ControlSubject> clone() const override { return std::make_unique<DsnSubject>(*this); }
  std::optional<double> long_bound(double c) const override { return std::max(0.0, c); }

 private:
  DsnParams params_;
  DsnState state_;
};

class WindowPolicySubject final : public ControlSubject {
 public:
  WindowPolicySubject(double v_th, double base, double margin) : v_th_(v_th), base_(base), margin_(margin) {
    if (!(v_th > 0.0)) throw DomainError("window policy: v_th must be positive");
    if (!(base >= 0.0 && base < 1.0)) throw DomainError("window policy: base alpha must lie in [0, 1)");
    if (!(margin > 0.0 && margin < 1.0)) throw DomainError("window policy: margin must lie in (0, 1)");
  }
  std::string name() const override { return "dsn-policy"; }
  double v_th() const override { return v_th_; }
  void reset() override { h_ = 0.0; }
  double step(double x) override {
    double alpha = base_;
    if (h_ >= v_th_ && x < v_th_) alpha = alpha_window_condition(h_, x, v_th_) * (1.0 - margin_);
    h_ = alpha * h_ + (1.0 - alpha) * x;
    return h_;
  }
  std::unique_ptr<ControlSubject> clone() const override { return std::make_unique<WindowPolicySubject>(*this); }
  std::optional<double> long_bound(double c) const override { return std::max(0.0, c); }

 private:
  double v_th_, base_, margin_;
  double h_ = 0.0;
};

struct Run {
  std::vector<double> inputs;
  std::vector<double> h;

  void feed(ControlSubject& s, double x) {
    inputs.push_back(x);
    h.push_back(s.step(x));
  }
};

// Drives H to at least `target` by growing a single input until it gets
// there, falling back to repeating 2 target when one step cannot.
void prime(ControlSubject& s, double target, Run& run) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double x = target;
    for (int j = 0; j < 64; ++j, x *= 2.0) {
      auto probe = s.clone();
      if (probe->step(x) >= target) {
        run.feed(s, x);
        return;
      }
    }
    run.feed(s, 2.0 * target);
    if (run.h.back() >= target) return;
  }
  throw DomainError("short control: cannot drive " + s.name() + " to the requested membrane");
}

double below(double hi, double lo, double u) { return std::min(lo + (hi - lo) * u, std::nextafter(hi, lo)); }

void require_subject_matches(const ControlSubject& subject, const Witness& w) {
  if (w.inputs.size() != w.h.size() || w.violated_step >= w.h.size())
    throw DomainError("witness for " + subject.name() + " is malformed");
}

}  // namespace

std::unique_ptr<ControlSubject> make_lif_subject(const NeuronConfig& cfg) { return std::make_unique<LifSubject>(cfg); }

std::unique_ptr<ControlSubject> make_dsn_subject(const DsnParams& params) { return std::make_unique<DsnSubject>(params); }

std::unique_ptr<ControlSubject> make_window_policy_subject(double v_th, double base_alpha, double margin) {
  return std::make_unique<WindowPolicySubject>(v_th, base_alpha, margin);
}

std::vector<std::string> subject_names() {
  return {"if-hard", "if-soft", "if-none", "lif-hard", "lif-soft", "lif-none", "dsn", "dsn-policy"};
}

std::unique_ptr<ControlSubject> make_subject(const std::string& name, std::uint64_t seed) {
  for (ResetMode mode : {ResetMode::kHard, ResetMode::kSoft, ResetMode::kNone}) {
    if (name == "if-" + to_string(mode)) return make_lif_subject(NeuronConfig::integrate_and_fire(mode));
    if (name == "lif-" + to_string(mode)) return make_lif_subject(NeuronConfig::lif(2.0, mode));
  }
  if (name == "dsn") {
    std::mt19937_64 rng(seed);
    return make_dsn_subject(DsnParams::init(1, 4, rng));
  }
  if (name == "dsn-policy") return make_window_policy_subject(1.0, 0.5);
  throw DomainError("unknown control subject '" + name + "'");
}

ControlVerdict check_short_control(const ControlSubject& subject, std::size_t delta, const ShortControlOptions& opt) {
  if (delta == 0) throw DomainError("short control: delta must be at least 1");
  if (!(opt.boundary_eps > 0.0 && opt.boundary_eps < 1.0)) throw DomainError("short control: boundary eps in (0, 1)");
  const double v_th = subject.v_th();
  const double cap = v_th / static_cast<double>(delta);
  ControlVerdict verdict;
  verdict.subject = subject.name();
  verdict.property = "short-control";

  auto run_case = [&](const std::vector<double>& preamble, double target, const std::vector<double>& small,
                      const char* kind) {
    auto s = subject.clone();
    s->reset();
    Run run;
    for (double x : preamble) run.feed(*s, x);
    prime(*s, target, run);
    const double h_start = run.h.back();
    for (double x : small) run.feed(*s, x);
    ++verdict.trials;
    verdict.observed_max = std::max(verdict.observed_max, run.h.back());
    if (run.h.back() < v_th) return true;
    verdict.holds = false;
    const std::size_t last = run.h.size() - 1;
    verdict.witness = Witness{std::move(run.inputs), std::move(run.h), last, v_th, true,
                              std::string(kind) + " case: H_{t-Delta} = " + std::to_string(h_start)};
    return false;
  };

  const std::vector<double> boundary(delta, cap * (1.0 - opt.boundary_eps));
  if (!run_case({}, v_th, boundary, "boundary") || !run_case({}, 10.0 * v_th, boundary, "boundary"))
    return verdict;
  for (int k = 0; k <= opt.escalation_decades; ++k)
    if (!run_case({}, v_th * std::pow(10.0, k), boundary, "escalating")) return verdict;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pre_len(0, 4);
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    std::vector<double> preamble(static_cast<std::size_t>(pre_len(rng)));
    for (double& x : preamble) x = v_th * (3.0 * unit(rng) - 1.0);
    const double target = v_th * std::pow(10.0, opt.max_log10_target * unit(rng));
    std::vector<double> small(delta);
    for (double& x : small) x = below(cap, -v_th, unit(rng));
    if (!run_case(preamble, target, small, "random")) return verdict;
  }
  return verdict;
}

ControlVerdict check_long_control(const ControlSubject& subject, double c_bound, std::size_t steps,
                                  const LongControlOptions& opt) {
  if (!(c_bound > 0.0) || !std::isfinite(c_bound)) throw DomainError("long control: input bound must be positive");
  if (steps == 0) throw DomainError("long control: steps must be at least 1");
  const double v_th = subject.v_th();
  const double divergence = opt.divergence_factor * v_th;
  const std::optional<double> bound = subject.long_bound(c_bound);
  double limit = divergence;
  std::string what = "diverged past " + std::to_string(opt.divergence_factor) + " v_th";
  if (bound) {
    const double slack = *bound + opt.rounding_slack * std::max(1.0, std::abs(*bound));
    if (slack < limit) {
      limit = slack;
      what = "exceeded the claimed bound " + std::to_string(*bound);
    }
  }
  ControlVerdict verdict;
  verdict.subject = subject.name();
  verdict.property = "long-control";
  verdict.observed_max = -std::numeric_limits<double>::infinity();

  auto finish = [&](Run run, const char* kind) {
    ++verdict.trials;
    for (std::size_t i = 0; i < run.h.size(); ++i) {
      verdict.observed_max = std::max(verdict.observed_max, run.h[i]);
      if (run.h[i] > limit) {
        verdict.holds = false;
        run.inputs.resize(i + 1);
        run.h.resize(i + 1);
        verdict.witness = Witness{std::move(run.inputs), std::move(run.h), i, limit, false,
                                  std::string(kind) + " input: H " + what};
        return false;
      }
    }
    return true;
  };

  {
    auto s = subject.clone();
    s->reset();
    Run run;
    for (std::size_t i = 0; i < opt.horizon; ++i) {
      run.feed(*s, c_bound);
      if (run.h.back() > limit) break;
    }
    if (!finish(std::move(run), "constant")) return verdict;
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-c_bound, c_bound);
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    auto s = subject.clone();
    s->reset();
    Run run;
    for (std::size_t i = 0; i < steps; ++i) run.feed(*s, u(rng));
    if (!finish(std::move(run), "random")) return verdict;
  }
  return verdict;
}

bool replay_witness(const ControlSubject& subject, const Witness& witness) {
  require_subject_matches(subject, witness);
  auto s = subject.clone();
  s->reset();
  for (std::size_t i = 0; i < witness.inputs.size(); ++i)
    if (s->step(witness.inputs[i]) != witness.h[i]) return false;
  const double h = witness.h[witness.violated_step];
  return witness.inclusive ? h >= witness.limit : h > witness.limit;
}

std::optional<std::size_t> search_short_control(const ControlSubject& subject, std::size_t max_delta,
                                                const ShortControlOptions& opt) {
  for (std::size_t delta = 1; delta <= max_delta; ++delta)
    if (check_short_control(subject, delta, opt).holds) return delta;
  return std::nullopt;
}

std::vector<double> construct_soft_reset_counterexample(std::size_t delta, double v_th,
                                                        const std::vector<double>& small_inputs, double margin) {
  if (delta == 0 || small_inputs.size() != delta) throw DomainError("counterexample: need exactly delta small inputs");
  if (!(v_th > 0.0) || !(margin > 0.0)) throw DomainError("counterexample: v_th and margin must be positive");
  double total = 0.0;
  for (double x : small_inputs) {
    if (!(x < v_th / static_cast<double>(delta))) throw DomainError("counterexample: inputs must be below v_th / delta");
    total += x;
  }
  std::vector<double> seq{(static_cast<double>(delta) + 1.0) * v_th - total + margin * v_th};
  seq.insert(seq.end(), small_inputs.begin(), small_inputs.end());
  return seq;
}

std::vector<double> construct_lif_soft_reset_counterexample(const NeuronConfig& cfg, std::size_t delta,
                                                            const std::vector<double>& small_inputs, double margin) {
  cfg.validate();
  if (cfg.leak != Leak::kLIF || cfg.reset != ResetMode::kSoft || !(cfg.beta > 0.0))
    throw DomainError("counterexample: needs a soft-reset LIF with 0 < beta < 1");
  if (delta == 0 || small_inputs.size() != delta) throw DomainError("counterexample: need exactly delta small inputs");
  if (!(margin > 0.0)) throw DomainError("counterexample: margin must be positive");
  const double beta = cfg.beta;
  double required = 0.0;
  for (std::size_t i = 0; i <= delta; ++i) required += std::pow(beta, -static_cast<double>(i)) * cfg.v_th;
  for (std::size_t i = 1; i <= delta; ++i) {
    const double x = small_inputs[i - 1];
    if (!(x < cfg.v_th / static_cast<double>(delta)))
      throw DomainError("counterexample: inputs must be below v_th / delta");
    required += std::pow(beta, -static_cast<double>(i - 1)) * (1.0 - 1.0 / beta) * x;
  }
  const double h_start = std::max(required, cfg.v_th) * (1.0 + margin);
  // From rest, H_1 = (1 - beta) x_1.
  std::vector<double> seq{h_start / (1.0 - beta)};
  seq.insert(seq.end(), small_inputs.begin(), small_inputs.end());
  return seq;
}

double alpha_window_condition(double h_prev, double x_t, double v_th) {
  if (!(h_prev > x_t)) throw DomainError("alpha window: needs h_prev > x_t");
  if (!(h_prev >= v_th && v_th > x_t)) throw DomainError("alpha window: needs h_prev >= v_th > x_t");
  return (v_th - x_t) / (h_prev - x_t);
}

std::vector<double> alpha_duration_schedule(double h_prev, const std::vector<double>& xs, double v_th,
                                            std::size_t tau, double after) {
  if (tau == 0 || tau > xs.size()) throw DomainError("alpha schedule: tau must lie in [1, len(xs)]");
  if (!(after >= 0.0 && after < 1.0)) throw DomainError("alpha schedule: trailing alpha must lie in [0, 1)");
  std::vector<double> alphas(xs.size());
  double h = h_prev;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double alpha = after;
    if (i < tau) {
      const double edge = alpha_window_condition(h, xs[i], v_th);
      if (i + 1 < tau) {
        if (!(edge < 1.0)) throw DomainError("alpha schedule: the membrane cannot stay above threshold");
        alpha = edge + 0.5 * (1.0 - edge);
      } else {
        alpha = 0.5 * edge;
      }
    }
    alphas[i] = alpha;
    h = alpha * h + (1.0 - alpha) * xs[i];
  }
  return alphas;
}

std::vector<double> replay_decay_schedule(double h_prev, const std::vector<double>& xs,
                                          const std::vector<double>& alphas) {
  if (xs.size() != alphas.size()) throw ShapeError("decay schedule: inputs and decays differ in length");
  std::vector<double> h(xs.size());
  double state = h_prev;
  for (std::size_t i = 0; i < xs.size(); ++i) h[i] = state = alphas[i] * state + (1.0 - alphas[i]) * xs[i];
  return h;
}

namespace {

Tensor slice(const Tensor& x, std::size_t t) {
  Tensor out(Shape{batch_of(x), channels_of(x)});
  for (std::size_t b = 0; b < batch_of(x); ++b)
    for (std::size_t c = 0; c < channels_of(x); ++c) out.at(b, c) = x.at(b, c, t);
  return out;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

ConditionsRow check_conditions_table(const Neuron& neuron, std::uint64_t seed, std::size_t trials) {
  const std::size_t channels = neuron.required_channels() ? neuron.required_channels() : 2;
  const std::size_t length = neuron.required_length() ? neuron.required_length() : 48;
  if (length < 4) throw DomainError("conditions table: sequence length must be at least 4");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 3.0);
  auto random_input = [&](std::size_t steps) {
    Tensor x(Shape{1, channels, steps});
    for (double& v : x.data()) v = u(rng);
    return x;
  };

  ConditionsRow row;
  row.neuron = neuron.name();
  bool causal = true, invariant = true, matches = true;
  const std::size_t cut = length / 2, delay = length / 4;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const Tensor x = random_input(length);
    const Tensor h = neuron.membrane(x);
    const double tol = 1e-9 * std::max(1.0, max_abs(h));

    Tensor other = x;
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = cut; t < length; ++t) other.at(0, c, t) = u(rng);
    const Tensor h_other = neuron.membrane(other);

    Tensor shifted(x.shape());
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = delay; t < length; ++t) shifted.at(0, c, t) = x.at(0, c, t - delay);
    const Tensor h_shifted = neuron.membrane(shifted);

    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < cut; ++t) causal = causal && std::abs(h.at(0, c, t) - h_other.at(0, c, t)) <= tol;
      for (std::size_t t = delay; t < length; ++t)
        invariant = invariant && std::abs(h_shifted.at(0, c, t) - h.at(0, c, t - delay)) <= tol;
    }
    if (neuron.has_parallel_path()) matches = matches && neuron.parallel_spikes(x).vec() == neuron.reference_spikes(x).vec();
  }
  row.condition1 = causal && invariant;
  row.condition3 = neuron.has_parallel_path() && matches;

  std::string c2 = "no online update";
  if (auto stepper = neuron.stepper(1, channels)) {
    // Run four times past the parameter length; the carried state must not grow.
    const Tensor x = random_input(4 * length);
    const Tensor head = neuron.required_length() ? Tensor() : neuron.spikes(x);
    std::vector<std::size_t> sizes;
    bool consistent = true;
    for (std::size_t t = 0; t < 4 * length; ++t) {
      const Tensor s = stepper->step(slice(x, t));
      if (!head.empty())
        for (std::size_t c = 0; c < channels; ++c) consistent = consistent && s.at(0, c) == head.at(0, c, t);
      if (t == 0 || t + 1 == length || t + 1 == 4 * length) sizes.push_back(stepper->state_size());
    }
    const bool bounded = std::all_of(sizes.begin(), sizes.end(), [&](std::size_t n) { return n == sizes.front(); });
    row.condition2 = bounded && consistent;
    c2 = "state " + std::to_string(sizes.front()) + (bounded ? " doubles at every t" : " doubles, growing") +
         (consistent ? "" : ", stepper disagrees with sequence mode");
  }
  row.detail = std::string("causal=") + (causal ? "yes" : "no") + " time-invariant=" + (invariant ? "yes" : "no") +
               "; " + c2 + "; parallel path " +
               (neuron.has_parallel_path() ? (matches ? "matches reference" : "disagrees with reference") : "absent");
  return row;
}

std::unique_ptr<Neuron> make_table_neuron(const std::string& name, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (name == "lif" || name == "lif-hard") return make_lif_neuron(NeuronConfig::lif(2.0, ResetMode::kHard));
  if (name == "lif-soft") return make_lif_neuron(NeuronConfig::lif(2.0, ResetMode::kSoft));
  if (name == "psn") return make_psn_neuron(PsnParams::full(24, rng));
  if (name == "masked-psn") return make_psn_neuron(PsnParams::masked(24, 4, rng));
  if (name == "sliding-psn") return make_psn_neuron(PsnParams::sliding(4, rng));
  if (name == "dsn") return make_dsn_neuron(DsnParams::init(2, 4, rng));
  if (name == "dsn-enhanced") return make_dsn_neuron(DsnParams::init(2, 4, rng, true));
  throw DomainError("unknown neuron '" + name + "' for the conditions table");
}

std::vector<std::string> table_neuron_names() {
  return {"lif", "lif-hard", "lif-soft", "psn", "masked-psn", "sliding-psn", "dsn", "dsn-enhanced"};
}

std::optional<ConditionsRow> expected_conditions_row(const std::string& neuron) {
  std::string family = neuron;
  for (const char* name : {"lif-hard", "lif-soft", "if-hard", "if-soft"})
    if (neuron == name) family = "lif";
  if (neuron == "dsn-enhanced") family = "dsn";
  if (family == "lif") return ConditionsRow{family, true, true, false, ""};
  if (family == "psn" || family == "masked-psn") return ConditionsRow{family, false, false, true, ""};
  if (family == "sliding-psn" || family == "dsn") return ConditionsRow{family, true, true, true, ""};
  return std::nullopt;
}

std::size_t check_soft_reset_lemma(std::size_t max_delta) {
  std::size_t pairs = 0;
  for (long long d = 1; d <= static_cast<long long>(max_delta); ++d)
    for (long long m = 1; m <= d; ++m, ++pairs)
      if (d * d + m - m * d < d)
        throw DomainError("lemma fails at delta = " + std::to_string(d) + ", m = " + std::to_string(m));
  return pairs;
}

std::optional<bool> expected_control(const std::string& subject, const std::string& property) {
  if (property == "short-control") {
    if (subject == "if-hard" || subject == "lif-hard" || subject == "dsn-policy") return true;
    if (subject == "if-soft" || subject == "lif-soft" || subject == "if-none" || subject == "lif-none") return false;
    return std::nullopt;
  }
  if (property == "long-control") {
    if (subject == "if-soft" || subject == "if-none") return false;
    for (const std::string& name : subject_names())
      if (subject == name) return true;
    return std::nullopt;
  }
  throw DomainError("unknown property '" + property + "'");
}

std::string to_json(const ControlVerdict& verdict) {
  Json j{{"neuron", verdict.subject}, {"property", verdict.property}, {"holds", verdict.holds},
         {"trials", verdict.trials}};
  if (verdict.property == "long-control") j["observed_max_h"] = verdict.observed_max;
  if (verdict.witness) {
    const Witness& w = *verdict.witness;
    Json wj{{"violated_step", w.violated_step}, {"h_at_violation", w.h[w.violated_step]},
            {"limit", w.limit}, {"comparison", w.inclusive ? ">=" : ">"}, {"length", w.inputs.size()},
            {"note", w.note}};
    const bool constant = std::all_of(w.inputs.begin(), w.inputs.end(), [&](double x) { return x == w.inputs[0]; });
    if (w.inputs.size() <= 256) {
      wj["inputs"] = w.inputs;
      wj["h"] = w.h;
    } else if (constant) {
      wj["constant_input"] = w.inputs[0];
    } else {
      wj["inputs_head"] = std::vector<double>(w.inputs.begin(), w.inputs.begin() + 16);
      wj["inputs_tail"] = std::vector<double>(w.inputs.end() - 16, w.inputs.end());
    }
    j["witness"] = wj;
  }
  return j.dump(2);
}

std::string to_json(const ConditionsRow& row, const std::optional<ConditionsRow>& expected) {
  Json j{{"neuron", row.neuron},
         {"condition1", row.condition1},
         {"condition2", row.condition2},
         {"condition3", row.condition3},
         {"detail", row.detail}};
  if (expected) {
    j["expected"] = {{"condition1", expected->condition1},
                     {"condition2", expected->condition2},
                     {"condition3", expected->condition3}};
    j["matches"] = row.condition1 == expected->condition1 && row.condition2 == expected->condition2 &&
                   row.condition3 == expected->condition3;
  }
  return j.dump(2);
}

}  // namespace spikescan
