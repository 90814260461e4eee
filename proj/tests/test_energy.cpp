#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "spikescan/energy.hpp"
#include "spikescan/error.hpp"

using namespace spikescan;

namespace {

const EnergyNeuron kAll[] = {EnergyNeuron::kLif, EnergyNeuron::kPsn, EnergyNeuron::kSlidingPsn, EnergyNeuron::kDsn};

// Independent tally of the S-CIFAR stack: conv1 on float pixels, conv2-6 and
// both FC layers on spikes, seven neuron layers of 4096 x 3, 2048 x 3, 256.
double oracle_total_pj(EnergyNeuron n, const std::vector<double>& r, double t, std::size_t classes,
                       bool per_step_float, double spike_mult) {
  const double synaptic[] = {3.0 * 32 * 128 * 128, 3.0 * 32 * 128 * 128, 3.0 * 16 * 128 * 128,
                             3.0 * 16 * 128 * 128, 3.0 * 16 * 128 * 128, 1024.0 * 256,
                             256.0 * static_cast<double>(classes)};
  double pj = 4.6 * 3.0 * 32 * 3 * 128 * (per_step_float ? t : 1.0);
  for (int i = 0; i < 7; ++i) pj += spike_mult * 0.9 * t * r[static_cast<std::size_t>(i)] * synaptic[i];
  const double c = 3 * 4096.0 + 3 * 2048.0 + 256.0;
  switch (n) {
    case EnergyNeuron::kLif: pj += 4.6 * c * t; break;
    case EnergyNeuron::kPsn: pj += 4.6 * c * t * t; break;
    case EnergyNeuron::kSlidingPsn: pj += 4.6 * 0.5 * c * t * t; break;
    case EnergyNeuron::kDsn: pj += 4.6 * 5.0 * c * t + 2.34 * c * t; break;
  }
  return pj;
}

}  // namespace

TEST_SUITE("energy") {
  TEST_CASE("FLOPs rules") {
    CHECK(count_flops(LayerSpec::fully_connected("fc", 1024, 256, true)) == 262144.0);
    CHECK(count_flops(LayerSpec::conv1d("c", 3, 32, 128, 128, true)) == 3.0 * 32 * 128 * 128);
    CHECK(count_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kPsn, 128, 32)) == 131072.0);
    CHECK(count_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kSlidingPsn, 128, 32)) == 65536.0);
    CHECK(count_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kLif, 128, 32)) == 4096.0);
    const NeuronFlops dsn = neuron_flops(LayerSpec::neuron_layer("n", EnergyNeuron::kDsn, 128, 32, 4));
    CHECK(dsn.total() == 24576.0);
    CHECK(dsn.conv == 16384.0);
    CHECK(dsn.sigmoid == 4096.0);
    CHECK(dsn.update == 4096.0);
  }

  TEST_CASE("bad layers and neuron names") {
    CHECK_THROWS_AS(LayerSpec::fully_connected("fc", 0, 4, true), DomainError);
    CHECK_THROWS_AS(LayerSpec::neuron_layer("n", EnergyNeuron::kLif, 4, 0), DomainError);
    CHECK_THROWS_AS(parse_energy_neuron("adex"), DomainError);
    CHECK_THROWS_AS(neuron_flops(LayerSpec::fully_connected("fc", 2, 2, true)), DomainError);
  }

  TEST_CASE("sigmoid costs two shifts and an add") {
    CHECK(EnergyProfile::literal().sigmoid_pj() == doctest::Approx(2.34));
  }

  TEST_CASE("rate bookkeeping") {
    const auto arch = scifar_architecture(EnergyNeuron::kLif);
    CHECK_THROWS_AS(estimate_energy(arch, std::vector<double>(6, 0.1), 32, EnergyProfile::literal()), DomainError);
    CHECK_THROWS_AS(estimate_energy(arch, std::vector<double>(8, 0.1), 32, EnergyProfile::literal()), DomainError);
    std::vector<double> bad(7, 0.1);
    bad[3] = -0.1;
    CHECK_THROWS_AS(estimate_energy(arch, bad, 32, EnergyProfile::literal()), DomainError);
  }

  TEST_CASE("zero rates leave no spike-path energy") {
    const auto r = estimate_energy(scifar_architecture(EnergyNeuron::kDsn), std::vector<double>(7, 0.0), 32,
                                   EnergyProfile::reconciled());
    double sum = 0.0;
    for (const auto& l : r.layers) {
      CHECK(l.ac_energy_pj == 0.0);
      CHECK(l.total_pj() >= 0.0);
      sum += l.total_pj();
    }
    CHECK(r.total_pj == doctest::Approx(sum));
  }

  TEST_CASE("energy is monotone in every rate") {
    const auto arch = scifar_architecture(EnergyNeuron::kLif);
    const auto base = published_firing_rates(EnergyNeuron::kLif, 10);
    const double e0 = estimate_energy(arch, base, 32, EnergyProfile::literal()).total_pj;
    for (std::size_t i = 0; i < base.size(); ++i) {
      auto up = base;
      up[i] += 0.05;
      CHECK(estimate_energy(arch, up, 32, EnergyProfile::literal()).total_pj > e0);
    }
  }

  TEST_CASE("both profiles agree with an independent tally") {
    for (std::size_t classes : {10u, 100u})
      for (EnergyNeuron n : kAll) {
        const auto rates = published_firing_rates(n, classes);
        const auto arch = scifar_architecture(n, classes, 32);
        const auto lit = estimate_energy(arch, rates, 32, EnergyProfile::literal());
        const auto rec = estimate_energy(arch, rates, 32, EnergyProfile::reconciled());
        CHECK(lit.total_pj == doctest::Approx(oracle_total_pj(n, rates, 32, classes, false, 1.0)).epsilon(1e-12));
        CHECK(rec.total_pj == doctest::Approx(oracle_total_pj(n, rates, 32, classes, true, 4.0)).epsilon(1e-12));
      }
  }

  TEST_CASE("reconciled totals land near the published energy") {
    for (std::size_t classes : {10u, 100u})
      for (EnergyNeuron n : kAll) {
        const auto r = estimate_energy(scifar_architecture(n, classes), published_firing_rates(n, classes), 32,
                                       EnergyProfile::reconciled());
        const double ref = published_energy_mj(n, classes);
        CHECK(std::abs(r.total - ref) / ref <= 0.01);
      }
  }

  TEST_CASE("published averages are FLOPs-weighted") {
    for (std::size_t classes : {10u, 100u})
      for (EnergyNeuron n : kAll) {
        const double avg = average_firing_rate(scifar_architecture(n, classes), published_firing_rates(n, classes));
        CHECK(std::abs(avg - published_average_rate(n, classes)) <= 6e-5);
      }
  }

  TEST_CASE("measured firing rate") {
    CHECK(measure_firing_rate(Tensor(Shape{2, 3, 4})).mean_count == 0.0);
    CHECK(measure_firing_rate(Tensor(Shape{2, 3, 4}, 1.0)).normalized == 1.0);
    const FiringRate f = measure_firing_rate(Tensor(Shape{1, 1, 4}, std::vector<double>{4, 0, 2, 2}), 4);
    CHECK(f.mean_count == 2.0);
    CHECK(f.normalized == 0.5);
  }

  TEST_CASE("CSV has one row per layer plus the total") {
    const auto r = estimate_energy(scifar_architecture(EnergyNeuron::kLif), published_firing_rates(EnergyNeuron::kLif, 10),
                                   32, EnergyProfile::reconciled());
    const std::string csv = energy_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 15 + 1);
    CHECK(energy_json(r).find("\"profile\": \"reconciled\"") != std::string::npos);
  }
}
