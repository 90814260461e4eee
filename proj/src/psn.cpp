#include "spikescan/psn.hpp"

#include <cmath>

#include "spikescan/kernels/psn.hpp"
#include "spikescan/ops.hpp"

namespace spikescan {

namespace {

Tensor uniform_fan_in(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w(shape);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = u(rng);
  return w;
}

}  // namespace

PsnParams PsnParams::full(std::size_t t_train, std::mt19937_64& rng) {
  if (t_train == 0) throw DomainError("psn: t_train must be positive");
  return {PsnKind::kFull, uniform_fan_in(Shape{t_train, t_train}, t_train, rng), t_train, t_train};
}

PsnParams PsnParams::masked(std::size_t t_train, std::size_t order, std::mt19937_64& rng) {
  if (t_train == 0 || order == 0 || order > t_train) throw DomainError("masked psn: need 1 <= order <= t_train");
  PsnParams p{PsnKind::kMasked, uniform_fan_in(Shape{t_train, t_train}, order, rng), t_train, order};
  p.weight = p.effective_weight();
  return p;
}

PsnParams PsnParams::sliding(std::size_t order, std::mt19937_64& rng) {
  if (order == 0) throw DomainError("sliding psn: order must be positive");
  return {PsnKind::kSliding, uniform_fan_in(Shape{order}, order, rng), 0, order};
}

Tensor PsnParams::mask() const {
  if (kind != PsnKind::kMasked) return Tensor(weight.shape(), 1.0);
  Tensor m(weight.shape(), 0.0);
  for (std::size_t t = 0; t < t_train; ++t)
    for (std::size_t i = t + 1 >= order ? t + 1 - order : 0; i <= t; ++i) m.at(t, i) = 1.0;
  return m;
}

Tensor PsnParams::effective_weight() const {
  if (kind != PsnKind::kMasked) return weight;
  const Tensor m = mask();
  Tensor w = weight;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= m[i];
  return w;
}

void PsnParams::validate() const {
  if (kind == PsnKind::kSliding) {
    if (!(weight.shape() == Shape{order}) || order == 0) throw ShapeError("sliding psn: weight must be [order]");
    return;
  }
  if (!(weight.shape() == Shape{t_train, t_train}) || t_train == 0)
    throw ShapeError("psn: weight must be [t_train x t_train]");
  if (kind == PsnKind::kMasked && (order == 0 || order > t_train))
    throw DomainError("masked psn: need 1 <= order <= t_train");
}

void require_psn_length(const PsnParams& params, std::size_t steps) {
  if (params.length_bound() && steps != params.t_train) throw LengthMismatch(params.t_train, steps);
}

Tensor psn_membrane(const PsnParams& params, const Tensor& x, Execution exec) {
  params.validate();
  require_rank(x, 3, "psn");
  const std::size_t steps = length_of(x), lanes = batch_of(x) * channels_of(x);
  require_psn_length(params, steps);
  Tensor h(x.shape());
  const bool serial = exec == Execution::kSerial;
  if (params.kind == PsnKind::kSliding) {
    if (serial)
      kernels::psn_sliding_forward_serial(lanes, steps, params.weight.data(), x.data(), h.data());
    else
      kernels::psn_sliding_forward_parallel(lanes, steps, params.weight.data(), x.data(), h.data());
  } else {
    const Tensor w = params.effective_weight();
    if (serial)
      kernels::psn_dense_forward_serial(lanes, steps, w.data(), x.data(), h.data());
    else
      kernels::psn_dense_forward_parallel(lanes, steps, w.data(), x.data(), h.data());
  }
  h.require_finite("psn");
  return h;
}

Tensor psn_forward(const PsnParams& params, const Tensor& x, double v_th, Execution exec) {
  Tensor h = psn_membrane(params, x, exec);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = heaviside(h[i] - v_th);
  return h;
}

Var psn_membrane(Var x, Var weight, const PsnParams& params) {
  PsnParams live = params;
  live.weight = weight.value();
  Tensor h = psn_membrane(live, x.value());
  const Tensor xs = x.value();
  const Tensor w = live.effective_weight();
  const Tensor m = live.mask();
  return x.tape->record("psn", {x, weight}, std::move(h), [live, xs, w, m](const Tensor& g) {
    const std::size_t steps = length_of(xs), lanes = batch_of(xs) * channels_of(xs);
    Tensor dx(xs.shape()), dw(w.shape());
    if (live.kind == PsnKind::kSliding) {
      kernels::psn_sliding_backward_parallel(lanes, steps, w.data(), xs.data(), g.data(), dx.data(), dw.data());
    } else {
      kernels::psn_dense_backward_parallel(lanes, steps, w.data(), xs.data(), g.data(), dx.data(), dw.data());
      for (std::size_t i = 0; i < dw.size(); ++i) dw[i] *= m[i];
    }
    return std::vector<Tensor>{std::move(dx), std::move(dw)};
  });
}

Var psn_forward(Var x, Var weight, const PsnParams& params, double v_th, const SurrogateKind& sg) {
  return spike_threshold(psn_membrane(x, weight, params), v_th, sg);
}

SlidingPsnState SlidingPsnState::zeros(const PsnParams& params, std::size_t batch, std::size_t channels) {
  params.validate();
  if (params.kind != PsnKind::kSliding) throw DomainError("only sliding psn has an online state");
  return {Tensor(Shape{batch, channels, params.order - 1}, 0.0), 0, 0};
}

SlidingPsnStep sliding_psn_step(const PsnParams& params, SlidingPsnState& state, const Tensor& x_t, double v_th) {
  require_rank(x_t, 2, "sliding_psn_step");
  const std::size_t batch = x_t.shape()[0], c = x_t.shape()[1], ring = params.order - 1;
  if (!(state.window.shape() == Shape{batch, c, ring})) throw ShapeError("sliding_psn_step: state shape mismatch");
  const std::size_t taps = std::min(params.order, state.t + 1);
  SlidingPsnStep out{Tensor(x_t.shape()), Tensor(x_t.shape())};
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      acc += params.weight[0] * x_t.at(b, ch);
      for (std::size_t j = 1; j < taps; ++j)
        acc += params.weight[j] * state.window.at(b, ch, (state.head + ring - j) % ring);
      out.h.at(b, ch) = acc;
      out.s.at(b, ch) = heaviside(acc - v_th);
    }
  if (ring > 0) {
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t ch = 0; ch < c; ++ch) state.window.at(b, ch, state.head) = x_t.at(b, ch);
    state.head = (state.head + 1) % ring;
  }
  ++state.t;
  return out;
}

std::string to_string(PsnKind kind) {
  switch (kind) {
    case PsnKind::kFull: return "psn";
    case PsnKind::kMasked: return "masked-psn";
    case PsnKind::kSliding: return "sliding-psn";
  }
  return "?";
}

}  // namespace spikescan
