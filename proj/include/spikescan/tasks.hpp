#pragma once

#include <string>
#include <vector>

#include "spikescan/datasets.hpp"
#include "spikescan/energy.hpp"
#include "spikescan/lif.hpp"
#include "spikescan/train.hpp"

namespace spikescan {

// One channel of the approximation target: a LIF neuron with v_th = 1.
struct TargetChannel {
  ResetMode reset = ResetMode::kHard;
  double tau_m = 2.0;
  bool integer = false;  // soft-reset integer LIF, S = clip(round(H), 0, 4)

  std::string label() const;
};

// Channels 1-6: hard reset tau_m = 4/3, 2, 4, then soft reset tau_m = 4/3, 2, 4.
std::vector<TargetChannel> approx_targets();
// The soft-reset channels with integer spikes.
std::vector<TargetChannel> integer_approx_targets();

// Pre-reset membrane and spikes of each target channel for x [B x 1 x T];
// both [B x C x T].
struct TargetTrace {
  Tensor h;
  Tensor s;
};
TargetTrace target_trace(const std::vector<TargetChannel>& targets, const Tensor& x);

// Integer LIF: H_t = beta V_{t-1} + (1 - beta) x_t, S_t = clip(round(H_t), 0, n_max),
// V_t = H_t - S_t.
TargetTrace integer_lif_sequence(double beta, int n_max, const Tensor& x);

// Dynamic-decay bank fitted to the targets:
//   alpha = Sigmoid(conv_down(ReLU(conv_up(x))))^(1 / tau),  H_t = alpha_t H_{t-1} + (1 - alpha_t) x_t
// with both convolutions causal of width k, conv_up C -> eC and conv_down eC -> C,
// and the scalar input copied onto all C channels.
struct ApproxModel {
  std::size_t channels = 6;
  std::size_t k = 8;
  std::size_t expansion = 8;
  double tau = 0.5;
  NamedTensors params;  // up.weight [eC x C x k], up.bias [eC], down.weight [C x eC x k], down.bias [C]

  static ApproxModel init(std::size_t channels, std::size_t k, std::size_t expansion, double tau,
                          std::mt19937_64& rng);
  std::size_t parameter_count() const;
};

struct ApproxTaped {
  Var h;
  Var alpha;
};
ApproxTaped approx_forward(const ApproxModel& model, Tape& tape, const std::vector<Var>& leaves, const Tensor& x,
                           Execution exec = Execution::kParallel);
// Untaped membrane for x [B x 1 x T].
Tensor approx_membrane(const ApproxModel& model, const Tensor& x, Execution exec = Execution::kParallel);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;  // fraction in [0, 1]
};

struct ApproxResult {
  std::string dataset;
  bool integer = false;
  std::vector<std::string> channels;
  std::vector<double> accuracy;  // per channel, fraction
  double average = 0.0;
  // Integer runs only: |S_pred - S_target| <= 1, a diagnostic beside the
  // exact-equality score.
  std::vector<double> accuracy_within_one;
  std::vector<EpochLog> per_epoch;
  std::size_t parameters = 0;
};

enum class Scale { kDesk, kFull };
Scale parse_scale(const std::string& name);

// The dataset for "a" or "b" at the given scale: A is 2000/200 (desk) or
// 10000/1000 (full); B is always the 800-sample grid.
Dataset approx_dataset(const std::string& dataset, Scale scale, std::uint64_t seed);

// Trains MSE(H_pred, H_target) and scores spike equality on the test set.
// Epoch 0 in per_epoch is the untrained model.
ApproxResult run_approx_experiment(const std::string& dataset_name, const Dataset& data,
                                   const std::vector<TargetChannel>& targets, const TrainConfig& cfg);

struct PixelResult {
  std::string neuron;
  double accuracy = 0.0;
  double untrained_accuracy = 0.0;
  std::vector<EpochLog> per_epoch;
  // Per neuron layer on the test set after training; DSN layers emit
  // integer spikes up to spike_limit.
  int spike_limit = 1;
  std::vector<FiringRate> firing_rates;
};

struct PixelConfig {
  std::size_t samples = 640;
  std::size_t hidden = 32;
  TrainConfig train{.epochs = 12, .batch_size = 32, .peak_lr = 1e-2};
};

// Conv1D(k = 3, same padding) - neuron, twice, then a time average and a
// linear classifier, on gen_pixel_dataset. Firing rates are measured on the
// test set after training.
PixelResult run_pixel_task(NeuronKind kind, const PixelConfig& cfg);

struct ExtrapolationPoint {
  std::size_t length = 0;
  double loss = 0.0;
};

struct ExtrapolationResult {
  std::string neuron;
  std::size_t train_length = 0;
  double train_mode_loss = 0.0;  // parallel evaluation at train_length
  std::vector<ExtrapolationPoint> points;
  std::vector<EpochLog> per_epoch;
};

struct ExtrapolationConfig {
  std::size_t channels = 8;
  std::size_t train_sequences = 64;
  std::size_t eval_sequences = 8;
  std::size_t sliding_order = 32;
  TrainConfig train{.epochs = 20, .batch_size = 16, .peak_lr = 1e-2};
};

// Next-value prediction x_t -> x_{t+1} through encoder - neuron - decoder
// (both k = 1 convolutions). Trained in parallel mode at train_length and
// evaluated step by step at every eval length. Neurons without an online
// update run in sequence mode, which raises LengthMismatch away from
// train_length; run_extrapolation propagates it.
ExtrapolationResult run_extrapolation(NeuronKind kind, std::size_t train_length,
                                      const std::vector<std::size_t>& eval_lengths, const ExtrapolationConfig& cfg);

std::string to_json(const ApproxResult& r, std::uint64_t seed);
std::string to_csv(const ApproxResult& r);
std::string to_json(const PixelResult& r, std::uint64_t seed);
std::string to_json(const ExtrapolationResult& r, std::uint64_t seed);
std::string to_csv(const ExtrapolationResult& r);

}  // namespace spikescan
