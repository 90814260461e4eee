#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spikescan/tensor.hpp"

namespace spikescan {

enum class EnergyNeuron { kLif, kPsn, kSlidingPsn, kDsn };

EnergyNeuron parse_energy_neuron(const std::string& name);
std::string to_string(EnergyNeuron kind);

enum class LayerKind { kConv1d, kFullyConnected, kNeuron };

// Conv1D(k, d, c_in, c_out): k d c_in c_out FLOPs per timestep.
// FullyConnected(i, o): i o FLOPs per timestep.
// Neuron(kind, c, T, k): the neuron-internal FLOPs of c neurons over T steps.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kConv1d;
  std::size_t k = 0, d = 0, c_in = 0, c_out = 0;
  EnergyNeuron neuron = EnergyNeuron::kLif;
  std::size_t count = 0, steps = 0;
  bool input_is_spike = false;

  static LayerSpec conv1d(std::string name, std::size_t k, std::size_t d, std::size_t c_in, std::size_t c_out,
                          bool input_is_spike);
  static LayerSpec fully_connected(std::string name, std::size_t i, std::size_t o, bool input_is_spike);
  static LayerSpec neuron_layer(std::string name, EnergyNeuron kind, std::size_t c, std::size_t steps,
                                std::size_t k = 4);
  // Throws DomainError for a zero extent.
  void validate() const;
};

// Neuron-internal FLOPs split by the operation that performs them.
struct NeuronFlops {
  double conv = 0.0;     // DSN causal conv, k c T
  double sigmoid = 0.0;  // DSN sigmoid, c T
  double update = 0.0;   // membrane update: c T (LIF, DSN), c T^2 (PSN), 0.5 c T^2 (sliding PSN)
  double total() const { return conv + sigmoid + update; }
};

NeuronFlops neuron_flops(const LayerSpec& layer);
double count_flops(const LayerSpec& layer);

// Energy constants and accounting choices. `literal` follows the stated
// formulas: float synaptic ops E_MAC FLOPs, spike ops E_AC T R FLOPs,
// reported in mJ. `reconciled` is the accounting under which the published
// totals are recovered: float synaptic ops are charged every timestep, spike
// ops carry a factor of 4, and the totals are pJ / 1e6.
struct EnergyProfile {
  std::string name = "literal";
  double e_mac = 4.6;    // pJ
  double e_ac = 0.9;     // pJ
  double e_shift = 0.72; // pJ
  bool float_ops_per_timestep = false;
  double spike_op_multiplier = 1.0;
  double pj_per_unit = 1e9;

  static EnergyProfile literal();
  static EnergyProfile reconciled();
  // Two shifts and one addition.
  double sigmoid_pj() const { return 2.0 * e_shift + e_ac; }
};

struct LayerEnergy {
  std::string name;
  double flops = 0.0;
  std::optional<double> firing_rate;
  double mac_energy_pj = 0.0;
  double ac_energy_pj = 0.0;
  double sigmoid_energy_pj = 0.0;
  double total_pj() const { return mac_energy_pj + ac_energy_pj + sigmoid_energy_pj; }
};

struct EnergyReport {
  std::string profile;
  std::vector<LayerEnergy> layers;
  double total_pj = 0.0;
  double total = 0.0;  // total_pj / pj_per_unit
};

// firing_rates holds one rate per spike-input synaptic layer, in order.
// Neuron layers are charged their internal FLOPs (E_MAC per FLOP, sigmoid at
// sigmoid_pj()). Throws DomainError on a missing or extra rate, or a
// negative or non-finite one.
EnergyReport estimate_energy(const std::vector<LayerSpec>& layers, const std::vector<double>& firing_rates,
                             std::size_t steps, const EnergyProfile& profile);

// Six Conv1D(3)-neuron blocks (128 channels, feature size 32 then 16),
// FC1 1024 -> 256 with a neuron, FC2 256 -> classes. The first conv reads
// floating-point pixels.
std::vector<LayerSpec> scifar_architecture(EnergyNeuron neuron, std::size_t classes = 10, std::size_t steps = 32);

// Published per-layer rates (Conv2..FC2) and totals for S-CIFAR10/100.
std::vector<double> published_firing_rates(EnergyNeuron neuron, std::size_t classes);
double published_energy_mj(EnergyNeuron neuron, std::size_t classes);
double published_average_rate(EnergyNeuron neuron, std::size_t classes);

// FLOPs-weighted mean of the spike-input layer rates.
double average_firing_rate(const std::vector<LayerSpec>& layers, const std::vector<double>& firing_rates);

// Mean spike count per neuron per timestep, and the same divided by n_max
// (equal for binary spikes, n_max = 1).
struct FiringRate {
  double mean_count = 0.0;
  double normalized = 0.0;
};
FiringRate measure_firing_rate(const Tensor& spikes, int n_max = 1);

std::string energy_csv(const EnergyReport& report);
std::string energy_json(const EnergyReport& report);

}  // namespace spikescan
