#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spikescan/tensor.hpp"

namespace spikescan {

// Sequences with a train/test split. `labels` is empty for unlabeled sets.
struct Dataset {
  Tensor inputs;  // [n x C x T]
  std::vector<int> labels;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  std::size_t size() const { return inputs.empty() ? 0 : batch_of(inputs); }
  // Rows `index` of inputs, stacked in order.
  Tensor gather(const std::vector<std::size_t>& index) const;
  std::vector<int> gather_labels(const std::vector<std::size_t>& index) const;
};

// c evenly spaced values from a to b; c = 1 gives {a}.
std::vector<double> linspace(double a, double b, std::size_t c);

enum class SignalKind { kSine, kSigmoid, kStep, kPoisson };

// One Dataset B generator, x = 0..T-1:
//   sine     A sin(w x) + B,  w = 2 pi (C - 1) / (T - 1)
//   sigmoid  A Sigmoid(20 x / (T - 1) - 10 + B)
//   step     A Heaviside(x - B)
//   poisson  A Heaviside(u_x - p0), u_x uniform on [0, 1)
struct SignalSpec {
  SignalKind kind = SignalKind::kSine;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;  // sine cycles; p0 for poisson
};

// Renders a spec; `rng` is drawn from only for poisson.
std::vector<double> render_signal(const SignalSpec& spec, std::size_t steps, std::mt19937_64& rng);

// The full Dataset B grid in generation order: 200 sine, 200 sigmoid, 200
// step, then 25 poisson pairs each repeated 8 times.
std::vector<SignalSpec> dataset_b_grid(std::size_t steps = 128);

std::string to_string(SignalKind kind);

// i.i.d. normal draws [n x 1 x T]; the last n / 11 samples are the test set.
Dataset gen_dataset_a(std::size_t n, std::uint64_t seed, std::size_t steps = 128, double mu = 1.0,
                      double sigma = 2.0);

// 800 sequences from dataset_b_grid, labels = SignalKind; a random 10% are test.
Dataset gen_dataset_b(std::uint64_t seed, std::size_t steps = 128);

// Procedural 16 x 16 images read column by column (channels = rows, time =
// columns). Classes: 0 horizontal bar, 1 vertical bar, 2 diagonal, 3 box.
// Gaussian pixel noise; the last quarter is the test set.
Dataset gen_pixel_dataset(std::size_t n, std::uint64_t seed, std::size_t size = 16, double noise = 0.3);

// Stationary two-tone signals with noise, [n x 1 x (T + 1)], for next-value
// prediction. The last quarter is the test set.
Dataset gen_autoregression(std::size_t n, std::size_t steps, std::uint64_t seed);

}  // namespace spikescan
