#include <cmath>
#include <random>

#include "doctest.h"
#include "spikescan/error.hpp"
#include "spikescan/lif.hpp"
#include "spikescan/tasks.hpp"

using namespace spikescan;

TEST_SUITE("datasets") {
  TEST_CASE("dataset A moments and split") {
    const Dataset d = gen_dataset_a(11000, 0);
    CHECK(d.inputs.shape() == Shape{11000, 1, 128});
    CHECK(d.inputs.sum() / static_cast<double>(d.inputs.size()) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(d.test.size() == 1000);
    CHECK(d.train.size() == 10000);
  }

  TEST_CASE("dataset A is seed-deterministic and sigma 0 is constant") {
    CHECK(gen_dataset_a(50, 3).inputs.max_abs_diff(gen_dataset_a(50, 3).inputs) == 0.0);
    const Dataset flat = gen_dataset_a(4, 1, 16, 0.7, 0.0);
    for (double v : flat.inputs.data()) CHECK(v == 0.7);
  }

  TEST_CASE("linspace endpoints") {
    const auto v = linspace(5, 15, 5);
    CHECK(v == std::vector<double>{5, 7.5, 10, 12.5, 15});
    CHECK(linspace(3, 9, 1) == std::vector<double>{3});
    CHECK_THROWS_AS(linspace(0, 1, 0), DomainError);
  }

  TEST_CASE("signal generators at hand-evaluated points") {
    std::mt19937_64 rng(0);
    const auto sine = render_signal({SignalKind::kSine, -2, -2, 5}, 128, rng);
    CHECK(sine[0] == doctest::Approx(-2.0));
    const auto step = render_signal({SignalKind::kStep, 1.5, 0, 0}, 128, rng);
    for (double v : step) CHECK(v == 1.5);
    const auto poisson = render_signal({SignalKind::kPoisson, 3, 0, 1.0}, 128, rng);
    for (double v : poisson) CHECK(v == 0.0);
    const auto sig = render_signal({SignalKind::kSigmoid, 2, 0, 0}, 129, rng);
    CHECK(sig[64] == doctest::Approx(1.0));
  }

  TEST_CASE("dataset B grid cardinalities") {
    const Dataset d = gen_dataset_b(0);
    CHECK(d.size() == 800);
    int counts[4] = {0, 0, 0, 0};
    for (int l : d.labels) ++counts[l];
    for (int c : counts) CHECK(c == 200);
    CHECK(d.test.size() == 80);
    CHECK(d.train.size() == 720);
  }

  TEST_CASE("pixel and autoregression shapes") {
    const Dataset p = gen_pixel_dataset(40, 0);
    CHECK(p.inputs.shape() == Shape{40, 16, 16});
    CHECK(p.test.size() == 10);
    const Dataset a = gen_autoregression(8, 32, 0);
    CHECK(a.inputs.shape() == Shape{8, 1, 33});
  }
}

TEST_SUITE("tasks") {
  TEST_CASE("approx model structure") {
    std::mt19937_64 rng(0);
    ApproxModel m = ApproxModel::init(6, 8, 8, 0.5, rng);
    CHECK(m.parameter_count() == 8 * 6 * 48 * 2 + 48 + 6);
    for (auto& [name, value] : m.params) value = Tensor(value.shape());
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& [name, value] : m.params) leaves.push_back(tape.constant(value));
    Tensor x(Shape{2, 1, 10}, 1.0);
    const ApproxTaped out = approx_forward(m, tape, leaves, x);
    for (double a : out.alpha.value().data()) CHECK(a == doctest::Approx(0.25));
    const Tensor zeros = approx_membrane(m, Tensor(Shape{2, 1, 10}));
    for (double h : zeros.data()) CHECK(h == 0.0);
  }

  TEST_CASE("target traces follow the LIF reference") {
    const Dataset d = gen_dataset_a(3, 5, 32);
    const auto targets = approx_targets();
    REQUIRE(targets.size() == 6);
    const TargetTrace tr = target_trace(targets, d.inputs);
    for (std::size_t c = 0; c < 6; ++c) {
      const auto cfg = NeuronConfig::lif(targets[c].tau_m, targets[c].reset);
      const LifTrace ref = lif_sequence(cfg, d.inputs);
      for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t t = 0; t < 32; ++t) {
          CHECK(tr.h.at(b, c, t) == ref.h.at(b, 0, t));
          CHECK(tr.s.at(b, c, t) == ref.s.at(b, 0, t));
        }
    }
  }

  TEST_CASE("integer LIF by hand") {
    // beta = 0.5: H1 = 1.5, S1 = 2, V1 = -0.5; H2 = -0.25 + 3 = 2.75, S2 = 3.
    Tensor x(Shape{1, 1, 2}, std::vector<double>{3.0, 6.0});
    const TargetTrace tr = integer_lif_sequence(0.5, 4, x);
    CHECK(tr.h.at(0, 0, 0) == 1.5);
    CHECK(tr.s.at(0, 0, 0) == 2.0);
    CHECK(tr.h.at(0, 0, 1) == 2.75);
    CHECK(tr.s.at(0, 0, 1) == 3.0);
    for (const auto& t : integer_approx_targets()) CHECK(t.reset == ResetMode::kSoft);
  }

  TEST_CASE("short approx run learns and is deterministic") {
    Dataset d = gen_dataset_a(220, 0, 64);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 32;
    const ApproxResult r1 = run_approx_experiment("a", d, approx_targets(), cfg);
    const ApproxResult r2 = run_approx_experiment("a", d, approx_targets(), cfg);
    REQUIRE(r1.per_epoch.size() == 4);
    CHECK(r1.per_epoch.back().test_loss < r1.per_epoch.front().test_loss);
    CHECK(r1.accuracy == r2.accuracy);
    CHECK(to_json(r1, 0) == to_json(r2, 0));
    CHECK(to_csv(r1).find("average,,") != std::string::npos);
  }

  TEST_CASE("pixel task ordering and determinism") {
    PixelConfig cfg;
    const PixelResult lif = run_pixel_task(NeuronKind::kLif, cfg);
    const PixelResult dsn = run_pixel_task(NeuronKind::kDsn, cfg);
    CHECK(lif.untrained_accuracy == doctest::Approx(0.25).epsilon(0.4));
    CHECK(dsn.accuracy >= lif.accuracy - 0.02);
    CHECK(run_pixel_task(NeuronKind::kDsn, cfg).accuracy == dsn.accuracy);
  }

  TEST_CASE("extrapolation: serial matches parallel at the training length") {
    ExtrapolationConfig cfg;
    cfg.train.epochs = 4;
    const ExtrapolationResult r = run_extrapolation(NeuronKind::kDsn, 128, {128, 512}, cfg);
    REQUIRE(r.points.size() == 2);
    CHECK(std::abs(r.points[0].loss - r.train_mode_loss) <= 1e-8);
    CHECK(std::isfinite(r.points[1].loss));
  }

  TEST_CASE("extrapolation: sequence-mode PSN refuses other lengths") {
    ExtrapolationConfig cfg;
    cfg.train.epochs = 1;
    CHECK_THROWS_AS(run_extrapolation(NeuronKind::kPsn, 64, {128}, cfg), LengthMismatch);
    CHECK_THROWS_AS(run_extrapolation(NeuronKind::kMaskedPsn, 64, {32}, cfg), LengthMismatch);
  }
}
