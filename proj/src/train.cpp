#include "spikescan/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace spikescan {

void TrainConfig::validate() const {
  if (batch_size == 0) throw DomainError("train config: batch size must be positive");
  if (!(peak_lr > 0.0) || !(weight_decay >= 0.0)) throw DomainError("train config: bad learning rate or decay");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps > 0.0))
    throw DomainError("train config: bad moment coefficients");
}

double cosine_lr(double peak, std::size_t step, std::size_t total) {
  if (total == 0 || step >= total) return 0.0;
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total)));
}

AdamW::AdamW(const NamedTensors& params, const TrainConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  for (const auto& [name, value] : params) {
    m_.emplace_back(value.shape());
    v_.emplace_back(value.shape());
  }
}

void AdamW::step(NamedTensors& params, const std::vector<Tensor>& grads, double lr) {
  if (grads.size() != params.size() || params.size() != m_.size()) throw ShapeError("adamw: parameter count changed");
  ++steps_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = params[p].second;
    require_same_shape(w, grads[p], "adamw");
    grads[p].require_finite("adamw gradient");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double g = grads[p][i];
      m_[p][i] = cfg_.beta1 * m_[p][i] + (1.0 - cfg_.beta1) * g;
      v_[p][i] = cfg_.beta2 * v_[p][i] + (1.0 - cfg_.beta2) * g * g;
      const double update = (m_[p][i] / c1) / (std::sqrt(v_[p][i] / c2) + cfg_.eps);
      w[i] -= lr * (update + cfg_.weight_decay * w[i]);
    }
  }
}

std::vector<Var> parameter_leaves(Tape& tape, const NamedTensors& params) {
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& [name, value] : params) leaves.push_back(tape.leaf(value));
  return leaves;
}

std::vector<Tensor> leaf_grads(const std::vector<Var>& leaves) {
  std::vector<Tensor> grads;
  grads.reserve(leaves.size());
  for (const Var& v : leaves) grads.push_back(v.grad());
  return grads;
}

Var leaf_named(const NamedTensors& params, const std::vector<Var>& leaves, const std::string& name) {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].first == name) return leaves.at(i);
  throw DomainError("no parameter named '" + name + "'");
}

std::vector<std::vector<std::size_t>> shuffled_batches(const std::vector<std::size_t>& items, std::size_t batch,
                                                       std::mt19937_64& rng) {
  if (batch == 0) throw DomainError("batches: size must be positive");
  std::vector<std::size_t> order = items;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch)));
  return out;
}

Tensor uniform_init(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor t(shape);
  for (double& v : t.data()) v = u(rng);
  return t;
}

NeuronKind parse_neuron_kind(const std::string& name) {
  if (name == "lif") return NeuronKind::kLif;
  if (name == "sliding-psn") return NeuronKind::kSlidingPsn;
  if (name == "masked-psn") return NeuronKind::kMaskedPsn;
  if (name == "psn") return NeuronKind::kPsn;
  if (name == "dsn") return NeuronKind::kDsn;
  throw DomainError("unknown neuron kind '" + name + "'");
}

std::string to_string(NeuronKind kind) {
  switch (kind) {
    case NeuronKind::kLif: return "lif";
    case NeuronKind::kSlidingPsn: return "sliding-psn";
    case NeuronKind::kMaskedPsn: return "masked-psn";
    case NeuronKind::kPsn: return "psn";
    case NeuronKind::kDsn: return "dsn";
  }
  return "?";
}

namespace {

const NeuronConfig kLayerLif = NeuronConfig::lif(2.0, ResetMode::kHard);

PsnParams psn_shape(const NeuronLayer& layer, std::mt19937_64& rng) {
  switch (layer.kind) {
    case NeuronKind::kSlidingPsn: return PsnParams::sliding(layer.order, rng);
    case NeuronKind::kMaskedPsn: return PsnParams::masked(layer.t_train, layer.order, rng);
    default: return PsnParams::full(layer.t_train, rng);
  }
}

// Structural PSN parameters carrying `weight`.
PsnParams psn_with(const NeuronLayer& layer, const Tensor& weight) {
  std::mt19937_64 unused(0);
  PsnParams p = psn_shape(layer, unused);
  require_same_shape(p.weight, weight, "psn layer weight");
  p.weight = weight;
  return p;
}

DsnParams dsn_with(const NeuronLayer& layer, const Tensor& kernel, const Tensor& bias) {
  std::mt19937_64 unused(0);
  DsnParams p = DsnParams::init(layer.channels, kernel.shape()[1], unused);
  p.conv_kernel = kernel;
  p.conv_bias = bias;
  return p;
}

const Tensor& param(const NamedTensors& params, const std::string& name) { return find_tensor(params, name); }

}  // namespace

void NeuronLayer::init(NamedTensors& params, const std::string& prefix, std::mt19937_64& rng) const {
  if (channels == 0) throw DomainError("neuron layer: channels must be positive");
  switch (kind) {
    case NeuronKind::kLif:
      return;
    case NeuronKind::kDsn: {
      const DsnParams p = DsnParams::init(channels, 4, rng);
      params.emplace_back(prefix + "kernel", p.conv_kernel);
      params.emplace_back(prefix + "bias", p.conv_bias);
      return;
    }
    default:
      params.emplace_back(prefix + "weight", psn_shape(*this, rng).weight);
  }
}

Var NeuronLayer::forward(Var x, const NamedTensors& params, const std::vector<Var>& leaves, const std::string& prefix,
                         Execution exec) const {
  switch (kind) {
    case NeuronKind::kLif:
      return lif_forward(x, kLayerLif, surrogate);
    case NeuronKind::kDsn: {
      const DsnParams p = dsn_with(*this, param(params, prefix + "kernel"), param(params, prefix + "bias"));
      const DsnVars vars{leaf_named(params, leaves, prefix + "kernel"), leaf_named(params, leaves, prefix + "bias"),
                         std::nullopt};
      return dsn_forward(x, vars, p, surrogate, exec).s;
    }
    default: {
      const PsnParams p = psn_with(*this, param(params, prefix + "weight"));
      return psn_forward(x, leaf_named(params, leaves, prefix + "weight"), p, 1.0, surrogate);
    }
  }
}

std::unique_ptr<Neuron> NeuronLayer::build(const NamedTensors& params, const std::string& prefix) const {
  switch (kind) {
    case NeuronKind::kLif:
      return make_lif_neuron(kLayerLif);
    case NeuronKind::kDsn:
      return make_dsn_neuron(dsn_with(*this, param(params, prefix + "kernel"), param(params, prefix + "bias")));
    default:
      return make_psn_neuron(psn_with(*this, param(params, prefix + "weight")));
  }
}

}  // namespace spikescan
