#pragma once

#include <memory>
#include <string>

#include "spikescan/dsn.hpp"
#include "spikescan/lif.hpp"
#include "spikescan/psn.hpp"

namespace spikescan {

// Online update u: consumes x_t [B x C], returns S_t.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual Tensor step(const Tensor& x_t) = 0;
  // Doubles carried between steps.
  virtual std::size_t state_size() const = 0;
};

// One neuron seen through the four maps of the structural conditions:
// prefix map (membrane), firing map (spikes from the membrane), online
// update (stepper) and parallel map (parallel_spikes).
class Neuron {
 public:
  virtual ~Neuron() = default;
  virtual std::string name() const = 0;

  // Sequence-mode spikes and membrane for x [B x C x T].
  virtual Tensor spikes(const Tensor& x) const = 0;
  virtual Tensor membrane(const Tensor& x) const = 0;

  // Nullptr when the neuron has no finite online update.
  virtual std::unique_ptr<Stepper> stepper(std::size_t batch, std::size_t channels) const = 0;

  virtual bool has_parallel_path() const = 0;
  // Throws DomainError when has_parallel_path() is false.
  virtual Tensor parallel_spikes(const Tensor& x) const = 0;
  // Spikes from the plainest evaluation of the definition: the step fold
  // when a stepper exists, otherwise the serial reference kernels.
  virtual Tensor reference_spikes(const Tensor& x) const = 0;

  // Channel count the parameters require; 0 means any.
  virtual std::size_t required_channels() const { return 0; }
  // Sequence length the parameters require; 0 means any.
  virtual std::size_t required_length() const { return 0; }
};

std::unique_ptr<Neuron> make_lif_neuron(const NeuronConfig& cfg);
std::unique_ptr<Neuron> make_dsn_neuron(const DsnParams& params);
std::unique_ptr<Neuron> make_psn_neuron(const PsnParams& params, double v_th = 1.0);

// Folds a stepper over x [B x C x T].
Tensor step_fold(Stepper& stepper, const Tensor& x);

}  // namespace spikescan
