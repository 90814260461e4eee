#include "spikescan/energy.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace spikescan {

EnergyNeuron parse_energy_neuron(const std::string& name) {
  if (name == "lif") return EnergyNeuron::kLif;
  if (name == "psn") return EnergyNeuron::kPsn;
  if (name == "sliding-psn") return EnergyNeuron::kSlidingPsn;
  if (name == "dsn") return EnergyNeuron::kDsn;
  throw DomainError("unknown neuron kind '" + name + "' for energy accounting");
}

std::string to_string(EnergyNeuron kind) {
  switch (kind) {
    case EnergyNeuron::kLif: return "lif";
    case EnergyNeuron::kPsn: return "psn";
    case EnergyNeuron::kSlidingPsn: return "sliding-psn";
    case EnergyNeuron::kDsn: return "dsn";
  }
  return "?";
}

LayerSpec LayerSpec::conv1d(std::string name, std::size_t k, std::size_t d, std::size_t c_in, std::size_t c_out,
                            bool input_is_spike) {
  LayerSpec s;
  s.name = std::move(name);
  s.kind = LayerKind::kConv1d;
  s.k = k;
  s.d = d;
  s.c_in = c_in;
  s.c_out = c_out;
  s.input_is_spike = input_is_spike;
  s.validate();
  return s;
}

LayerSpec LayerSpec::fully_connected(std::string name, std::size_t i, std::size_t o, bool input_is_spike) {
  LayerSpec s;
  s.name = std::move(name);
  s.kind = LayerKind::kFullyConnected;
  s.c_in = i;
  s.c_out = o;
  s.input_is_spike = input_is_spike;
  s.validate();
  return s;
}

LayerSpec LayerSpec::neuron_layer(std::string name, EnergyNeuron kind, std::size_t c, std::size_t steps,
                                  std::size_t k) {
  LayerSpec s;
  s.name = std::move(name);
  s.kind = LayerKind::kNeuron;
  s.neuron = kind;
  s.count = c;
  s.steps = steps;
  s.k = k;
  s.validate();
  return s;
}

void LayerSpec::validate() const {
  bool ok = true;
  switch (kind) {
    case LayerKind::kConv1d: ok = k && d && c_in && c_out; break;
    case LayerKind::kFullyConnected: ok = c_in && c_out; break;
    case LayerKind::kNeuron: ok = count && steps && (neuron != EnergyNeuron::kDsn || k); break;
  }
  if (!ok) throw DomainError("layer '" + name + "': extents must be positive");
}

NeuronFlops neuron_flops(const LayerSpec& layer) {
  layer.validate();
  if (layer.kind != LayerKind::kNeuron) throw DomainError("neuron_flops: '" + layer.name + "' is not a neuron layer");
  const double c = static_cast<double>(layer.count), t = static_cast<double>(layer.steps);
  NeuronFlops f;
  switch (layer.neuron) {
    case EnergyNeuron::kLif: f.update = c * t; break;
    case EnergyNeuron::kPsn: f.update = c * t * t; break;
    case EnergyNeuron::kSlidingPsn: f.update = 0.5 * c * t * t; break;
    case EnergyNeuron::kDsn:
      f.conv = static_cast<double>(layer.k) * c * t;
      f.sigmoid = c * t;
      f.update = c * t;
      break;
  }
  return f;
}

double count_flops(const LayerSpec& layer) {
  layer.validate();
  switch (layer.kind) {
    case LayerKind::kConv1d:
      return static_cast<double>(layer.k) * static_cast<double>(layer.d) * static_cast<double>(layer.c_in) *
             static_cast<double>(layer.c_out);
    case LayerKind::kFullyConnected: return static_cast<double>(layer.c_in) * static_cast<double>(layer.c_out);
    case LayerKind::kNeuron: return neuron_flops(layer).total();
  }
  return 0.0;
}

EnergyProfile EnergyProfile::literal() { return EnergyProfile{}; }

EnergyProfile EnergyProfile::reconciled() {
  EnergyProfile p;
  p.name = "reconciled";
  p.float_ops_per_timestep = true;
  p.spike_op_multiplier = 4.0;
  p.pj_per_unit = 1e6;
  return p;
}

EnergyReport estimate_energy(const std::vector<LayerSpec>& layers, const std::vector<double>& firing_rates,
                             std::size_t steps, const EnergyProfile& profile) {
  if (steps == 0) throw DomainError("estimate_energy: T must be positive");
  EnergyReport report;
  report.profile = profile.name;
  const double t = static_cast<double>(steps);
  std::size_t next_rate = 0;
  for (const LayerSpec& layer : layers) {
    LayerEnergy e;
    e.name = layer.name;
    e.flops = count_flops(layer);
    if (layer.kind == LayerKind::kNeuron) {
      const NeuronFlops f = neuron_flops(layer);
      e.mac_energy_pj = profile.e_mac * (f.conv + f.update);
      e.sigmoid_energy_pj = profile.sigmoid_pj() * f.sigmoid;
    } else if (layer.input_is_spike) {
      if (next_rate >= firing_rates.size()) throw DomainError("estimate_energy: missing firing rate for '" + layer.name + "'");
      const double r = firing_rates[next_rate++];
      if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("estimate_energy: bad firing rate for '" + layer.name + "'");
      e.firing_rate = r;
      e.ac_energy_pj = profile.spike_op_multiplier * profile.e_ac * t * r * e.flops;
    } else {
      e.mac_energy_pj = profile.e_mac * e.flops * (profile.float_ops_per_timestep ? t : 1.0);
    }
    report.total_pj += e.total_pj();
    report.layers.push_back(std::move(e));
  }
  if (next_rate != firing_rates.size()) throw DomainError("estimate_energy: more firing rates than spike-input layers");
  report.total = report.total_pj / profile.pj_per_unit;
  return report;
}

std::vector<LayerSpec> scifar_architecture(EnergyNeuron neuron, std::size_t classes, std::size_t steps) {
  std::vector<LayerSpec> layers;
  std::size_t c_in = 3;
  for (int i = 1; i <= 6; ++i) {
    const std::size_t feature = i <= 3 ? 32 : 16;
    const std::string n = std::to_string(i);
    layers.push_back(LayerSpec::conv1d("Conv" + n, 3, feature, c_in, 128, i > 1));
    layers.push_back(LayerSpec::neuron_layer("Neuron" + n, neuron, 128 * feature, steps));
    c_in = 128;
  }
  layers.push_back(LayerSpec::fully_connected("FC1", 1024, 256, true));
  layers.push_back(LayerSpec::neuron_layer("Neuron7", neuron, 256, steps));
  layers.push_back(LayerSpec::fully_connected("FC2", 256, classes, true));
  return layers;
}

namespace {

struct Published {
  EnergyNeuron neuron;
  std::size_t classes;
  std::vector<double> rates;
  double average;
  double energy_mj;
};

const std::vector<Published>& published() {
  static const std::vector<Published> table = {
      {EnergyNeuron::kLif, 10, {0.1511, 0.1422, 0.1811, 0.1553, 0.1457, 0.0926, 0.0647}, 0.1499, 107.80},
      {EnergyNeuron::kPsn, 10, {0.2200, 0.3101, 0.1575, 0.1542, 0.1516, 0.1439, 0.1239}, 0.2143, 235.87},
      {EnergyNeuron::kSlidingPsn, 10, {0.1792, 0.1875, 0.1297, 0.2538, 0.1923, 0.0764, 0.1172}, 0.1820, 170.39},
      {EnergyNeuron::kDsn, 10, {0.1349, 0.1337, 0.1301, 0.1301, 0.0982, 0.0380, 0.0484}, 0.1238, 102.89},
      {EnergyNeuron::kLif, 100, {0.2264, 0.1281, 0.1881, 0.1581, 0.1561, 0.1018, 0.1584}, 0.1697, 121.78},
      {EnergyNeuron::kPsn, 100, {0.3221, 0.2127, 0.1887, 0.1682, 0.1509, 0.1735, 0.1458}, 0.2226, 242.03},
      {EnergyNeuron::kSlidingPsn, 100, {0.1988, 0.2042, 0.1394, 0.2653, 0.1551, 0.0827, 0.1888}, 0.1900, 176.22},
      {EnergyNeuron::kDsn, 100, {0.1384, 0.1420, 0.1404, 0.1349, 0.1240, 0.0362, 0.0973}, 0.1324, 108.94},
  };
  return table;
}

const Published& lookup(EnergyNeuron neuron, std::size_t classes) {
  for (const Published& p : published())
    if (p.neuron == neuron && p.classes == classes) return p;
  throw DomainError("no published energy row for " + to_string(neuron) + " with " + std::to_string(classes) +
                    " classes");
}

}  // namespace

std::vector<double> published_firing_rates(EnergyNeuron neuron, std::size_t classes) {
  return lookup(neuron, classes).rates;
}
double published_energy_mj(EnergyNeuron neuron, std::size_t classes) { return lookup(neuron, classes).energy_mj; }
double published_average_rate(EnergyNeuron neuron, std::size_t classes) { return lookup(neuron, classes).average; }

double average_firing_rate(const std::vector<LayerSpec>& layers, const std::vector<double>& firing_rates) {
  double weighted = 0.0, flops = 0.0;
  std::size_t next = 0;
  for (const LayerSpec& layer : layers) {
    if (layer.kind == LayerKind::kNeuron || !layer.input_is_spike) continue;
    if (next >= firing_rates.size()) throw DomainError("average_firing_rate: missing firing rate");
    const double f = count_flops(layer);
    weighted += f * firing_rates[next++];
    flops += f;
  }
  if (next != firing_rates.size()) throw DomainError("average_firing_rate: more rates than spike-input layers");
  return flops > 0.0 ? weighted / flops : 0.0;
}

FiringRate measure_firing_rate(const Tensor& spikes, int n_max) {
  if (n_max < 1) throw DomainError("measure_firing_rate: n_max must be at least 1");
  if (spikes.empty()) return {};
  const double mean = spikes.sum() / static_cast<double>(spikes.size());
  return {mean, mean / static_cast<double>(n_max)};
}

std::string energy_csv(const EnergyReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "layer,flops,firing_rate,mac_energy_pJ,ac_energy_pJ,sigmoid_energy_pJ,total_pJ\n";
  for (const LayerEnergy& e : report.layers) {
    os << e.name << ',' << e.flops << ',';
    if (e.firing_rate) os << *e.firing_rate;
    os << ',' << e.mac_energy_pj << ',' << e.ac_energy_pj << ',' << e.sigmoid_energy_pj << ',' << e.total_pj() << '\n';
  }
  os << "total,,,,,," << report.total_pj << '\n';
  return os.str();
}

std::string energy_json(const EnergyReport& report) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerEnergy& e : report.layers) {
    nlohmann::json l{{"layer", e.name},
                     {"flops", e.flops},
                     {"mac_energy_pJ", e.mac_energy_pj},
                     {"ac_energy_pJ", e.ac_energy_pj},
                     {"sigmoid_energy_pJ", e.sigmoid_energy_pj},
                     {"total_pJ", e.total_pj()}};
    if (e.firing_rate) l["firing_rate"] = *e.firing_rate;
    layers.push_back(l);
  }
  return nlohmann::json{{"profile", report.profile},
                        {"layers", layers},
                        {"total_pJ", report.total_pj},
                        {"total", report.total}}
      .dump(2);
}

}  // namespace spikescan
