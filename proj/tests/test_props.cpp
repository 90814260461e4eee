#include <cmath>
#include <random>

#include "doctest.h"
#include "spikescan/props.hpp"

using namespace spikescan;

namespace {

ShortControlOptions quick_short(std::size_t trials = 2000) {
  ShortControlOptions opt;
  opt.trials = trials;
  opt.seed = 7;
  return opt;
}

LongControlOptions quick_long(std::size_t trials = 500) {
  LongControlOptions opt;
  opt.trials = trials;
  opt.seed = 8;
  return opt;
}

}  // namespace

TEST_SUITE("props") {
  TEST_CASE("hard reset gives short and long control") {
    for (const char* name : {"if-hard", "lif-hard"}) {
      auto subject = make_subject(name);
      for (std::size_t delta : {1, 2, 4, 8, 16}) CHECK(check_short_control(*subject, delta, quick_short()).holds);
      const ControlVerdict lc = check_long_control(*subject, 3.0, 64, quick_long());
      CHECK(lc.holds);
      CHECK(lc.observed_max <= *subject->long_bound(3.0));
    }
  }

  TEST_CASE("hard-reset IF reaches its C + v_th bound from below") {
    // Constant 0.9 accumulates to 1.8 before the first spike.
    auto subject = make_subject("if-hard");
    subject->reset();
    CHECK(subject->step(0.9) == doctest::Approx(0.9));
    CHECK(subject->step(0.9) == doctest::Approx(1.8));
    CHECK(*subject->long_bound(0.9) == doctest::Approx(1.9));
  }

  TEST_CASE("soft-reset IF fails both with replayable witnesses") {
    auto subject = make_subject("if-soft");
    const ControlVerdict sc = check_short_control(*subject, 4, quick_short());
    REQUIRE_FALSE(sc.holds);
    REQUIRE(sc.witness);
    CHECK(replay_witness(*subject, *sc.witness));

    const ControlVerdict lc = check_long_control(*subject, 2.0, 64, quick_long());
    REQUIRE_FALSE(lc.holds);
    REQUIRE(lc.witness);
    CHECK(replay_witness(*subject, *lc.witness));
    // Under constant C the membrane is t C - (t - 1) v_th.
    const Witness& w = *lc.witness;
    for (std::size_t i = 0; i < w.h.size(); i += 997) {
      const double t = static_cast<double>(i + 1);
      CHECK(w.h[i] == doctest::Approx(2.0 * t - (t - 1.0)));
    }
    CHECK(w.h.back() > 1e4);
    CHECK(w.inputs.size() < 100000);
  }

  TEST_CASE("soft-reset counterexample construction") {
    const std::vector<double> small(4, 0.2);
    const auto seq = construct_soft_reset_counterexample(4, 1.0, small);
    REQUIRE(seq.size() == 5);
    CHECK(seq[0] == doctest::Approx(4.3));
    auto subject = make_subject("if-soft");
    subject->reset();
    double h = 0.0;
    for (double x : seq) h = subject->step(x);
    CHECK(h >= 1.0);
    CHECK_THROWS_AS(construct_soft_reset_counterexample(4, 1.0, {0.2, 0.2, 0.2, 0.25}), DomainError);
    CHECK_THROWS_AS(construct_soft_reset_counterexample(4, 1.0, {0.2}), DomainError);
  }

  TEST_CASE("soft-reset LIF fails short control and keeps long control") {
    auto subject = make_subject("lif-soft");
    for (std::size_t delta : {1, 3, 8}) {
      const ControlVerdict sc = check_short_control(*subject, delta, quick_short(200));
      REQUIRE_FALSE(sc.holds);
      CHECK(replay_witness(*subject, *sc.witness));
    }
    CHECK(check_long_control(*subject, 2.0, 64, quick_long()).holds);

    const NeuronConfig cfg = NeuronConfig::lif(2.0, ResetMode::kSoft);
    for (std::size_t delta : {1, 2, 5, 10}) {
      std::vector<double> small(delta);
      std::mt19937_64 rng(delta);
      std::uniform_real_distribution<double> u(-1.0, 1.0 / static_cast<double>(delta));
      for (double& x : small) x = std::min(u(rng), std::nextafter(1.0 / static_cast<double>(delta), 0.0));
      const auto seq = construct_lif_soft_reset_counterexample(cfg, delta, small);
      auto s = make_lif_subject(cfg);
      s->reset();
      double h = 0.0;
      for (double x : seq) {
        h = s->step(x);
        CHECK(h >= 1.0);
      }
    }
  }

  TEST_CASE("reset-free neurons fail short control") {
    for (const char* name : {"if-none", "lif-none"}) CHECK_FALSE(check_short_control(*make_subject(name), 4, quick_short(100)).holds);
    CHECK_FALSE(check_long_control(*make_subject("if-none"), 2.0, 64, quick_long(10)).holds);
    CHECK(check_long_control(*make_subject("lif-none"), 2.0, 64, quick_long()).holds);
  }

  TEST_CASE("dynamic decay keeps long control with bound max(0, C)") {
    for (std::uint64_t seed : {1, 2, 3}) {
      auto subject = make_subject("dsn", seed);
      const ControlVerdict lc = check_long_control(*subject, 2.5, 64, quick_long(300));
      CHECK(lc.holds);
      CHECK(lc.observed_max <= 2.5 * (1 + 1e-12));
    }
  }

  TEST_CASE("window policy gives short control for every delta") {
    auto subject = make_subject("dsn-policy");
    for (std::size_t delta : {1, 2, 4, 16, 64}) CHECK(check_short_control(*subject, delta, quick_short(1000)).holds);
    for (double base : {0.0, 0.3, 0.9}) {
      auto s = make_window_policy_subject(1.0, base);
      CHECK(check_short_control(*s, 3, quick_short(500)).holds);
    }
    CHECK(search_short_control(*subject, 64, quick_short(200)) == std::size_t{1});
    CHECK_FALSE(search_short_control(*make_subject("if-soft"), 8, quick_short(50)).has_value());
  }

  TEST_CASE("alpha window condition") {
    CHECK(alpha_window_condition(4.0, 0.0, 1.0) == doctest::Approx(0.25));
    CHECK(replay_decay_schedule(4.0, {0.0}, {0.2})[0] == doctest::Approx(0.8));
    CHECK(replay_decay_schedule(4.0, {0.0}, {0.25})[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(alpha_window_condition(0.5, 0.5, 0.4), DomainError);
    CHECK_THROWS_AS(alpha_window_condition(0.9, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(alpha_window_condition(2.0, 1.5, 1.0), DomainError);
  }

  TEST_CASE("duration schedule sustains the membrane for exactly tau steps") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 0.9);
    for (std::size_t delta : {1, 3, 8, 20})
      for (std::size_t tau = 1; tau <= delta; ++tau) {
        std::vector<double> xs(delta);
        for (double& x : xs) x = u(rng);
        const auto alphas = alpha_duration_schedule(3.0, xs, 1.0, tau);
        const auto h = replay_decay_schedule(3.0, xs, alphas);
        for (std::size_t i = 0; i < delta; ++i) {
          if (i + 1 < tau) CHECK(h[i] >= 1.0);
          else CHECK(h[i] < 1.0);
        }
      }
    CHECK_THROWS_AS(alpha_duration_schedule(2.0, {0.0, 0.0}, 1.0, 3), DomainError);
    CHECK_THROWS_AS(alpha_duration_schedule(1.0, {0.0, 0.0}, 1.0, 2), DomainError);
  }

  TEST_CASE("structural conditions reproduce the table rows") {
    std::mt19937_64 rng(12);
    std::vector<std::unique_ptr<Neuron>> neurons;
    neurons.push_back(make_lif_neuron(NeuronConfig::lif(2.0, ResetMode::kHard)));
    neurons.push_back(make_lif_neuron(NeuronConfig::lif(2.0, ResetMode::kSoft)));
    neurons.push_back(make_psn_neuron(PsnParams::full(24, rng)));
    neurons.push_back(make_psn_neuron(PsnParams::masked(24, 4, rng)));
    neurons.push_back(make_psn_neuron(PsnParams::sliding(4, rng)));
    neurons.push_back(make_dsn_neuron(DsnParams::init(2, 4, rng)));
    neurons.push_back(make_dsn_neuron(DsnParams::init(2, 4, rng, true)));
    for (const auto& n : neurons) {
      const ConditionsRow row = check_conditions_table(*n, 5);
      const auto expect = expected_conditions_row(row.neuron);
      REQUIRE(expect);
      INFO(row.neuron << ": " << row.detail);
      CHECK(row.condition1 == expect->condition1);
      CHECK(row.condition2 == expect->condition2);
      CHECK(row.condition3 == expect->condition3);
    }
  }

  TEST_CASE("reset-free LIF is scan-parallel") {
    const ConditionsRow row = check_conditions_table(*make_lif_neuron(NeuronConfig::lif(2.0, ResetMode::kNone)), 6);
    CHECK(row.condition1);
    CHECK(row.condition2);
    CHECK(row.condition3);
  }

  TEST_CASE("soft-reset lemma holds for delta up to 64") {
    CHECK(check_soft_reset_lemma(64) == 64 * 65 / 2);
    // Exact rational oracle for a few pairs.
    for (int d = 1; d <= 12; ++d)
      for (int m = 1; m <= d; ++m) CHECK(d + static_cast<double>(m) / d - m >= 1.0 - 1e-12);
  }

  TEST_CASE("expected outcomes and verdict json") {
    CHECK(expected_control("if-soft", "short-control") == false);
    CHECK(expected_control("lif-soft", "long-control") == true);
    CHECK_FALSE(expected_control("dsn", "short-control").has_value());
    CHECK_THROWS_AS(expected_control("dsn", "medium-control"), DomainError);
    const ControlVerdict v = check_short_control(*make_subject("if-soft"), 2, quick_short(10));
    const std::string j = to_json(v);
    CHECK(j.find("\"holds\": false") != std::string::npos);
    CHECK(j.find("\"witness\"") != std::string::npos);
    CHECK_THROWS_AS(make_subject("nope"), DomainError);
  }
}
