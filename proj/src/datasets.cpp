#include "spikescan/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "spikescan/ops.hpp"

namespace spikescan {

Tensor Dataset::gather(const std::vector<std::size_t>& index) const {
  const std::size_t c = channels_of(inputs), t = length_of(inputs), row = c * t;
  Tensor out(Shape{index.size(), c, t});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= size()) throw ShapeError("dataset gather: index out of range");
    std::copy_n(inputs.data().begin() + static_cast<std::ptrdiff_t>(index[i] * row), row,
                out.data().begin() + static_cast<std::ptrdiff_t>(i * row));
  }
  return out;
}

std::vector<int> Dataset::gather_labels(const std::vector<std::size_t>& index) const {
  std::vector<int> out;
  out.reserve(index.size());
  for (std::size_t i : index) out.push_back(labels.at(i));
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t c) {
  if (c == 0) throw DomainError("linspace: count must be positive");
  std::vector<double> v(c, a);
  for (std::size_t i = 1; i < c; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(c - 1);
  return v;
}

std::vector<double> render_signal(const SignalSpec& spec, std::size_t steps, std::mt19937_64& rng) {
  if (steps < 2) throw DomainError("render_signal: need at least two steps");
  const double last = static_cast<double>(steps - 1);
  std::vector<double> out(steps);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < steps; ++i) {
    const double x = static_cast<double>(i);
    switch (spec.kind) {
      case SignalKind::kSine:
        out[i] = spec.a * std::sin(2.0 * std::numbers::pi * (spec.c - 1.0) / last * x) + spec.b;
        break;
      case SignalKind::kSigmoid:
        out[i] = spec.a * sigmoid_scalar(20.0 / last * x - 10.0 + spec.b);
        break;
      case SignalKind::kStep:
        out[i] = spec.a * heaviside(x - spec.b);
        break;
      case SignalKind::kPoisson:
        out[i] = spec.a * heaviside(unit(rng) - spec.c);
        break;
    }
  }
  return out;
}

std::vector<SignalSpec> dataset_b_grid(std::size_t steps) {
  std::vector<SignalSpec> grid;
  for (double a : linspace(-2, 3, 5))
    for (double b : linspace(-2, 3, 8))
      for (double c : linspace(5, 15, 5)) grid.push_back({SignalKind::kSine, a, b, c});
  // The sigmoid offset grid [10:10:20] is twenty copies of 10, taken as written.
  for (double a : linspace(-2, 5, 10))
    for (double b : linspace(10, 10, 20)) grid.push_back({SignalKind::kSigmoid, a, b, 0.0});
  for (double a : linspace(-2, 5, 10))
    for (double b : linspace(0, static_cast<double>(steps), 20)) grid.push_back({SignalKind::kStep, a, b, 0.0});
  for (double a : linspace(-1, 5, 5))
    for (double p0 : linspace(0.3, 1.0, 5))
      for (int rep = 0; rep < 8; ++rep) grid.push_back({SignalKind::kPoisson, a, 0.0, p0});
  return grid;
}

std::string to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::kSine: return "sine";
    case SignalKind::kSigmoid: return "sigmoid";
    case SignalKind::kStep: return "step";
    case SignalKind::kPoisson: return "poisson";
  }
  return "?";
}

namespace {

void split_tail(Dataset& d, std::size_t n_test) {
  const std::size_t n = d.size();
  d.train.resize(n - n_test);
  std::iota(d.train.begin(), d.train.end(), std::size_t{0});
  d.test.resize(n_test);
  std::iota(d.test.begin(), d.test.end(), n - n_test);
}

}  // namespace

Dataset gen_dataset_a(std::size_t n, std::uint64_t seed, std::size_t steps, double mu, double sigma) {
  if (n == 0 || steps == 0) throw DomainError("dataset A: n and T must be positive");
  if (!(sigma >= 0.0)) throw DomainError("dataset A: sigma must be nonnegative");
  Dataset d;
  d.inputs = Tensor(Shape{n, 1, steps});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : d.inputs.data()) v = mu + sigma * normal(rng);
  split_tail(d, n / 11);
  return d;
}

Dataset gen_dataset_b(std::uint64_t seed, std::size_t steps) {
  const std::vector<SignalSpec> grid = dataset_b_grid(steps);
  Dataset d;
  d.inputs = Tensor(Shape{grid.size(), 1, steps});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto row = render_signal(grid[i], steps, rng);
    std::copy(row.begin(), row.end(), d.inputs.data().begin() + static_cast<std::ptrdiff_t>(i * steps));
    d.labels.push_back(static_cast<int>(grid[i].kind));
  }
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_test = grid.size() / 10;
  d.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  d.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(d.test.begin(), d.test.end());
  std::sort(d.train.begin(), d.train.end());
  return d;
}

Dataset gen_pixel_dataset(std::size_t n, std::uint64_t seed, std::size_t size, double noise) {
  if (n == 0 || size < 8) throw DomainError("pixel dataset: need n >= 1 and size >= 8");
  Dataset d;
  d.inputs = Tensor(Shape{n, size, size});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise);
  std::uniform_int_distribution<std::size_t> pos(2, size - 3);
  std::uniform_int_distribution<std::size_t> half(2, size / 2 - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 4);
    const std::size_t r0 = pos(rng), c0 = pos(rng), h = half(rng);
    auto lit = [&](std::size_t r, std::size_t c) -> bool {
      const auto dr = static_cast<long>(r) - static_cast<long>(r0), dc = static_cast<long>(c) - static_cast<long>(c0);
      const long span = static_cast<long>(h);
      switch (label) {
        case 0: return dr == 0 && std::abs(dc) <= span;
        case 1: return dc == 0 && std::abs(dr) <= span;
        case 2: return dr == dc && std::abs(dr) <= span;
        default: return std::max(std::abs(dr), std::abs(dc)) == span;
      }
    };
    for (std::size_t r = 0; r < size; ++r)
      for (std::size_t c = 0; c < size; ++c) d.inputs.at(i, r, c) = (lit(r, c) ? 1.0 : 0.0) + gauss(rng);
    d.labels.push_back(label);
  }
  split_tail(d, n / 4);
  return d;
}

Dataset gen_autoregression(std::size_t n, std::size_t steps, std::uint64_t seed) {
  if (n == 0 || steps == 0) throw DomainError("autoregression: n and T must be positive");
  Dataset d;
  d.inputs = Tensor(Shape{n, 1, steps + 1});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.05, 0.3), phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> gauss(0.0, 0.1);
  for (std::size_t i = 0; i < n; ++i) {
    const double w1 = freq(rng), w2 = freq(rng), p1 = phase(rng), p2 = phase(rng);
    for (std::size_t t = 0; t <= steps; ++t) {
      const double x = static_cast<double>(t);
      d.inputs.at(i, 0, t) = std::sin(w1 * x + p1) + 0.5 * std::sin(w2 * x + p2) + gauss(rng);
    }
  }
  split_tail(d, n / 4);
  return d;
}

}  // namespace spikescan
