#include "spikescan/dsn.hpp"

#include <cmath>

#include "spikescan/kernels/conv.hpp"
#include "spikescan/ops.hpp"

namespace spikescan {

namespace {

inline double decay_from_preactivation(double a, double tau) { return std::pow(sigmoid_scalar(a), 1.0 / tau); }

double fire_scalar(const DsnParams& p, double h) {
  switch (p.firing) {
    case Firing::kInteger: return clip_round_scalar(h, p.n_max);
    case Firing::kBinary: return heaviside(h - p.v_th);
    case Firing::kRelaxed: return surrogate_primitive(ArcTangent{}, h - p.v_th);
  }
  return 0.0;
}

}  // namespace

DsnParams DsnParams::init(std::size_t channels, std::size_t k, std::mt19937_64& rng, bool enhanced) {
  if (channels == 0 || k == 0) throw DomainError("dsn: channels and k must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(k));
  std::uniform_real_distribution<double> u(-bound, bound);
  DsnParams p;
  p.conv_kernel = Tensor(Shape{channels, k});
  for (std::size_t i = 0; i < p.conv_kernel.size(); ++i) p.conv_kernel[i] = u(rng);
  p.conv_bias = Tensor(Shape{channels});
  for (std::size_t i = 0; i < channels; ++i) p.conv_bias[i] = u(rng);
  if (enhanced) {
    Tensor mix(Shape{channels, channels});
    for (std::size_t c = 0; c < channels; ++c) mix.at(c, c) = 1.0;
    p.channel_mix = std::move(mix);
  }
  return p;
}

void DsnParams::validate() const {
  require_rank(conv_kernel, 2, "dsn conv_kernel");
  const std::size_t c = channels();
  if (c == 0 || k() == 0) throw ShapeError("dsn: empty conv kernel");
  if (has_bias() && !(conv_bias.shape() == Shape{c})) throw ShapeError("dsn: conv_bias must be [C]");
  if (channel_mix && !(channel_mix->shape() == Shape{c, c})) throw ShapeError("dsn: channel_mix must be [C x C]");
  if (!(tau > 0) || !std::isfinite(tau)) throw DomainError("dsn: tau must be > 0");
  if (n_max < 1) throw DomainError("dsn: n_max must be >= 1");
  if (!(v_th > 0)) throw DomainError("dsn: v_th must be > 0");
}

Tensor dsn_dynamic_decay(const DsnParams& params, const Tensor& x_window) {
  params.validate();
  require_rank(x_window, 3, "dsn_dynamic_decay");
  const std::size_t batch = batch_of(x_window), c = params.channels(), k = params.k();
  if (channels_of(x_window) != c || length_of(x_window) != k)
    throw ShapeError("dsn_dynamic_decay: window must be [B x C x k], got " + x_window.shape().str());
  Tensor pre(Shape{batch, c});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      double acc = params.has_bias() ? params.conv_bias[ch] : 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += params.conv_kernel.at(ch, j) * x_window.at(b, ch, j);
      pre.at(b, ch) = acc;
    }
  if (params.channel_mix) {
    const Tensor& w = *params.channel_mix;
    Tensor mixed(pre.shape());
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < c; ++o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < c; ++i) acc += w.at(o, i) * pre.at(b, i);
        mixed.at(b, o) = acc;
      }
    pre = std::move(mixed);
  }
  Tensor alpha(pre.shape());
  for (std::size_t i = 0; i < pre.size(); ++i) alpha[i] = decay_from_preactivation(pre[i], params.tau);
  return alpha;
}

DsnState DsnState::zeros(const DsnParams& params, std::size_t batch) {
  params.validate();
  return {Tensor(Shape{batch, params.channels()}, 0.0), Tensor(Shape{batch, params.channels(), params.k() - 1}, 0.0),
          0, 0};
}

DsnStep dsn_step(const DsnParams& params, DsnState& state, const Tensor& x_t) {
  require_same_shape(state.h, x_t, "dsn_step");
  const std::size_t batch = batch_of(x_t), c = channels_of(x_t), k = params.k(), ring = k - 1;
  Tensor window(Shape{batch, c, k});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t j = 0; j < ring; ++j) window.at(b, ch, j) = state.window.at(b, ch, (state.head + j) % ring);
      window.at(b, ch, ring) = x_t.at(b, ch);
    }
  DsnStep out{Tensor(x_t.shape()), Tensor(x_t.shape()), dsn_dynamic_decay(params, window)};
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    const double a = out.alpha[i];
    out.h[i] = a * state.h[i] + (1.0 - a) * x_t[i];
    out.s[i] = fire_scalar(params, out.h[i]);
  }
  out.h.require_finite("dsn_step");
  if (ring > 0) {
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t ch = 0; ch < c; ++ch) state.window.at(b, ch, state.head) = x_t.at(b, ch);
    state.head = (state.head + 1) % ring;
  }
  state.h = out.h;
  ++state.t;
  return out;
}

Tensor dsn_fire(const DsnParams& params, const Tensor& h) {
  Tensor s(h.shape());
  for (std::size_t i = 0; i < h.size(); ++i) s[i] = fire_scalar(params, h[i]);
  return s;
}

DsnOutput dsn_forward_parallel(const DsnParams& params, const Tensor& x, Execution exec) {
  params.validate();
  require_rank(x, 3, "dsn_forward_parallel");
  if (channels_of(x) != params.channels())
    throw ShapeError("dsn: input has " + std::to_string(channels_of(x)) + " channels, params " +
                     std::to_string(params.channels()));
  const bool serial = exec == Execution::kSerial;
  kernels::ConvGeometry geo;
  geo.batch = batch_of(x);
  geo.c_in = geo.c_out = params.channels();
  geo.steps = length_of(x);
  geo.k = params.k();
  geo.pad_left = params.k() - 1;
  geo.depthwise = true;
  Tensor pre(x.shape());
  const std::span<const double> bias = params.has_bias() ? params.conv_bias.data() : std::span<const double>{};
  if (serial)
    kernels::conv1d_forward_serial(geo, x.data(), params.conv_kernel.data(), bias, pre.data());
  else
    kernels::conv1d_forward_parallel(geo, x.data(), params.conv_kernel.data(), bias, pre.data());

  if (params.channel_mix) {
    kernels::ConvGeometry mix = geo;
    mix.k = 1;
    mix.pad_left = 0;
    mix.depthwise = false;
    Tensor mixed(x.shape());
    if (serial)
      kernels::conv1d_forward_serial(mix, pre.data(), params.channel_mix->data(), {}, mixed.data());
    else
      kernels::conv1d_forward_parallel(mix, pre.data(), params.channel_mix->data(), {}, mixed.data());
    pre = std::move(mixed);
  }

  Tensor alpha(x.shape());
  for (std::size_t i = 0; i < pre.size(); ++i) alpha[i] = decay_from_preactivation(pre[i], params.tau);
  const ScanProblem problem(alpha, x);
  Tensor h = serial ? scan_serial(problem) : scan_parallel(problem);
  h.require_finite("dsn_forward_parallel");
  Tensor s = dsn_fire(params, h);
  return {std::move(s), std::move(h), std::move(alpha)};
}

DsnOutput dsn_forward_serial(const DsnParams& params, const Tensor& x) {
  require_rank(x, 3, "dsn_forward_serial");
  const std::size_t batch = batch_of(x), c = channels_of(x), steps = length_of(x);
  DsnState state = DsnState::zeros(params, batch);
  DsnOutput out{Tensor(x.shape()), Tensor(x.shape()), Tensor(x.shape())};
  Tensor x_t(Shape{batch, c});
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t ch = 0; ch < c; ++ch) x_t.at(b, ch) = x.at(b, ch, t);
    const DsnStep step = dsn_step(params, state, x_t);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t ch = 0; ch < c; ++ch) {
        out.s.at(b, ch, t) = step.s.at(b, ch);
        out.h.at(b, ch, t) = step.h.at(b, ch);
        out.alpha.at(b, ch, t) = step.alpha.at(b, ch);
      }
  }
  return out;
}

DsnVars DsnVars::leaves(Tape& tape, const DsnParams& params) {
  DsnVars v{tape.leaf(params.conv_kernel), std::nullopt, std::nullopt};
  if (params.has_bias()) v.bias = tape.leaf(params.conv_bias);
  if (params.channel_mix) v.mix = tape.leaf(*params.channel_mix);
  return v;
}

DsnTaped dsn_forward(Var x, const DsnVars& vars, const DsnParams& params, const SurrogateKind& sg, Execution exec) {
  params.validate();
  Var pre = causal_conv1d(x, vars.kernel, vars.bias);
  if (vars.mix) {
    const std::size_t c = params.channels();
    pre = conv1d(pre, reshape(*vars.mix, Shape{c, c, 1}), std::nullopt, 0);
  }
  const Var alpha = pow(sigmoid(pre), 1.0 / params.tau);
  const Var h = scan(alpha, x, exec);
  Var s = h;
  switch (params.firing) {
    case Firing::kInteger: s = clip_round(h, params.n_max); break;
    case Firing::kBinary: s = spike_threshold(h, params.v_th, sg); break;
    case Firing::kRelaxed: s = spike_relaxed(h, params.v_th, sg); break;
  }
  return {s, h, alpha};
}

}  // namespace spikescan
