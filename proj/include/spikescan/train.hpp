#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "spikescan/container.hpp"
#include "spikescan/dsn.hpp"
#include "spikescan/lif.hpp"
#include "spikescan/neuron.hpp"
#include "spikescan/psn.hpp"
#include "spikescan/tape.hpp"

namespace spikescan {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double peak_lr = 1e-2;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// peak * (1 + cos(pi * step / total)) / 2, and 0 once step >= total.
double cosine_lr(double peak, std::size_t step, std::size_t total);

// Adam moments with decoupled weight decay:
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
class AdamW {
 public:
  AdamW(const NamedTensors& params, const TrainConfig& cfg);
  // Updates params in place; grads are in the same order and shapes.
  void step(NamedTensors& params, const std::vector<Tensor>& grads, double lr);
  std::size_t steps() const { return steps_; }

 private:
  TrainConfig cfg_;
  std::vector<Tensor> m_, v_;
  std::size_t steps_ = 0;
};

// One tape leaf per parameter, in order.
std::vector<Var> parameter_leaves(Tape& tape, const NamedTensors& params);
// Tape gradients of the leaves, in order.
std::vector<Tensor> leaf_grads(const std::vector<Var>& leaves);
// The leaf for parameter `name`; throws DomainError when absent.
Var leaf_named(const NamedTensors& params, const std::vector<Var>& leaves, const std::string& name);

// A fresh permutation of [0, n) per epoch, split into batches of at most
// `batch` indices. Deterministic in the rng state.
std::vector<std::vector<std::size_t>> shuffled_batches(const std::vector<std::size_t>& items, std::size_t batch,
                                                       std::mt19937_64& rng);

// Uniform +-1/sqrt(fan_in), the usual conv/linear initialisation.
Tensor uniform_init(Shape shape, std::size_t fan_in, std::mt19937_64& rng);

enum class NeuronKind { kLif, kSlidingPsn, kMaskedPsn, kPsn, kDsn };

NeuronKind parse_neuron_kind(const std::string& name);
std::string to_string(NeuronKind kind);

// A trainable spiking layer over [B x channels x T]. LIF is hard reset with
// tau_m = 2; DSN uses integer firing with the default k, tau and N; sliding
// PSN has `order` taps; masked and full PSN are tied to t_train.
struct NeuronLayer {
  NeuronKind kind = NeuronKind::kDsn;
  std::size_t channels = 0;
  std::size_t t_train = 0;
  std::size_t order = 4;
  SurrogateKind surrogate = ArcTangent{};

  // Adds this layer's learnable tensors to params under `prefix`.
  void init(NamedTensors& params, const std::string& prefix, std::mt19937_64& rng) const;
  // Taped spikes.
  Var forward(Var x, const NamedTensors& params, const std::vector<Var>& leaves, const std::string& prefix,
              Execution exec = Execution::kParallel) const;
  // The trained neuron, for sequence or step evaluation.
  std::unique_ptr<Neuron> build(const NamedTensors& params, const std::string& prefix) const;
};

}  // namespace spikescan
