#include "spikescan/neuron.hpp"

#include "spikescan/ops.hpp"

namespace spikescan {

namespace {

Tensor time_slice(const Tensor& x, std::size_t t) {
  Tensor out(Shape{batch_of(x), channels_of(x)});
  for (std::size_t b = 0; b < batch_of(x); ++b)
    for (std::size_t c = 0; c < channels_of(x); ++c) out.at(b, c) = x.at(b, c, t);
  return out;
}

class LifStepper final : public Stepper {
 public:
  LifStepper(NeuronConfig cfg, std::size_t batch, std::size_t channels)
      : cfg_(cfg), state_(NeuronState::resting(batch, channels)) {}
  Tensor step(const Tensor& x_t) override {
    LifStep out = lif_step(cfg_, state_, x_t);
    state_ = std::move(out.state);
    return std::move(out.s);
  }
  std::size_t state_size() const override { return state_.v.size(); }

 private:
  NeuronConfig cfg_;
  NeuronState state_;
};

class LifNeuron final : public Neuron {
 public:
  explicit LifNeuron(NeuronConfig cfg) : cfg_(cfg) { cfg_.validate(); }
  std::string name() const override {
    return std::string(cfg_.leak == Leak::kIF ? "if-" : "lif-") + to_string(cfg_.reset);
  }
  Tensor spikes(const Tensor& x) const override { return lif_sequence(cfg_, x).s; }
  Tensor membrane(const Tensor& x) const override { return lif_sequence(cfg_, x).h; }
  std::unique_ptr<Stepper> stepper(std::size_t batch, std::size_t channels) const override {
    return std::make_unique<LifStepper>(cfg_, batch, channels);
  }
  // Only the reset-free recurrence is linear, and so scan-parallel.
  bool has_parallel_path() const override { return cfg_.reset == ResetMode::kNone; }
  Tensor parallel_spikes(const Tensor& x) const override {
    Tensor h = lif_membrane_parallel(cfg_, x);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = heaviside(h[i] - cfg_.v_th);
    return h;
  }
  Tensor reference_spikes(const Tensor& x) const override {
    LifStepper s(cfg_, batch_of(x), channels_of(x));
    return step_fold(s, x);
  }

 private:
  NeuronConfig cfg_;
};

class DsnStepper final : public Stepper {
 public:
  DsnStepper(const DsnParams& params, std::size_t batch) : params_(params), state_(DsnState::zeros(params, batch)) {}
  Tensor step(const Tensor& x_t) override { return dsn_step(params_, state_, x_t).s; }
  std::size_t state_size() const override { return state_.state_size(); }

 private:
  DsnParams params_;
  DsnState state_;
};

class DsnNeuron final : public Neuron {
 public:
  explicit DsnNeuron(DsnParams params) : params_(std::move(params)) { params_.validate(); }
  std::string name() const override { return params_.channel_mix ? "dsn-enhanced" : "dsn"; }
  Tensor spikes(const Tensor& x) const override { return dsn_forward_parallel(params_, x).s; }
  Tensor membrane(const Tensor& x) const override { return dsn_forward_parallel(params_, x).h; }
  std::unique_ptr<Stepper> stepper(std::size_t batch, std::size_t channels) const override {
    if (channels != params_.channels()) throw ShapeError("dsn stepper: channel count mismatch");
    return std::make_unique<DsnStepper>(params_, batch);
  }
  bool has_parallel_path() const override { return true; }
  Tensor parallel_spikes(const Tensor& x) const override { return dsn_forward_parallel(params_, x).s; }
  Tensor reference_spikes(const Tensor& x) const override { return dsn_forward_serial(params_, x).s; }
  std::size_t required_channels() const override { return params_.channels(); }

 private:
  DsnParams params_;
};

class SlidingPsnStepper final : public Stepper {
 public:
  SlidingPsnStepper(const PsnParams& params, double v_th, std::size_t batch, std::size_t channels)
      : params_(params), v_th_(v_th), state_(SlidingPsnState::zeros(params, batch, channels)) {}
  Tensor step(const Tensor& x_t) override { return sliding_psn_step(params_, state_, x_t, v_th_).s; }
  std::size_t state_size() const override { return state_.state_size(); }

 private:
  PsnParams params_;
  double v_th_;
  SlidingPsnState state_;
};

class PsnNeuron final : public Neuron {
 public:
  PsnNeuron(PsnParams params, double v_th) : params_(std::move(params)), v_th_(v_th) { params_.validate(); }
  std::string name() const override { return to_string(params_.kind); }
  Tensor spikes(const Tensor& x) const override { return psn_forward(params_, x, v_th_); }
  Tensor membrane(const Tensor& x) const override { return psn_membrane(params_, x); }
  // Full and masked PSN need the whole length-t_train sequence at once.
  std::unique_ptr<Stepper> stepper(std::size_t batch, std::size_t channels) const override {
    if (params_.kind != PsnKind::kSliding) return nullptr;
    return std::make_unique<SlidingPsnStepper>(params_, v_th_, batch, channels);
  }
  bool has_parallel_path() const override { return true; }
  Tensor parallel_spikes(const Tensor& x) const override { return psn_forward(params_, x, v_th_); }
  Tensor reference_spikes(const Tensor& x) const override {
    if (params_.kind == PsnKind::kSliding) {
      SlidingPsnStepper s(params_, v_th_, batch_of(x), channels_of(x));
      return step_fold(s, x);
    }
    return psn_forward(params_, x, v_th_, Execution::kSerial);
  }
  std::size_t required_length() const override { return params_.t_train; }

 private:
  PsnParams params_;
  double v_th_;
};

}  // namespace

Tensor step_fold(Stepper& stepper, const Tensor& x) {
  require_rank(x, 3, "step_fold");
  Tensor out(x.shape());
  for (std::size_t t = 0; t < length_of(x); ++t) {
    const Tensor s = stepper.step(time_slice(x, t));
    for (std::size_t b = 0; b < batch_of(x); ++b)
      for (std::size_t c = 0; c < channels_of(x); ++c) out.at(b, c, t) = s.at(b, c);
  }
  return out;
}

std::unique_ptr<Neuron> make_lif_neuron(const NeuronConfig& cfg) { return std::make_unique<LifNeuron>(cfg); }
std::unique_ptr<Neuron> make_dsn_neuron(const DsnParams& params) { return std::make_unique<DsnNeuron>(params); }
std::unique_ptr<Neuron> make_psn_neuron(const PsnParams& params, double v_th) {
  return std::make_unique<PsnNeuron>(params, v_th);
}

}  // namespace spikescan
