#include "spikescan/lif.hpp"

#include <cmath>
#include <vector>

#include "spikescan/kernels/scan.hpp"
#include "spikescan/ops.hpp"

namespace spikescan {

namespace {

struct Update {
  double h, s, v;
};

inline Update update(const NeuronConfig& cfg, double v_prev, double x) {
  const double h = cfg.leak == Leak::kIF ? v_prev + x : cfg.beta * v_prev + (1.0 - cfg.beta) * x;
  const double s = heaviside(h - cfg.v_th);
  double v = h;
  switch (cfg.reset) {
    case ResetMode::kHard: v = h * (1.0 - s) + cfg.v_reset * s; break;
    case ResetMode::kSoft: v = h - cfg.v_th * s; break;
    case ResetMode::kNone: break;
  }
  return {h, s, v};
}

}  // namespace

NeuronConfig NeuronConfig::lif(double tau_m, ResetMode reset, double v_th) {
  if (!(tau_m >= 1.0)) throw DomainError("lif: tau_m must be >= 1");
  NeuronConfig cfg;
  cfg.beta = 1.0 - 1.0 / tau_m;
  cfg.v_th = v_th;
  cfg.reset = reset;
  cfg.leak = Leak::kLIF;
  cfg.validate();
  return cfg;
}

NeuronConfig NeuronConfig::integrate_and_fire(ResetMode reset, double v_th) {
  NeuronConfig cfg;
  cfg.beta = 1.0;
  cfg.v_th = v_th;
  cfg.reset = reset;
  cfg.leak = Leak::kIF;
  cfg.validate();
  return cfg;
}

void NeuronConfig::validate() const {
  if (!(v_th > 0) || !std::isfinite(v_th)) throw DomainError("neuron: v_th must be finite and > 0");
  if (!std::isfinite(v_reset)) throw DomainError("neuron: v_reset must be finite");
  if (leak == Leak::kLIF && !(beta >= 0.0 && beta < 1.0)) throw DomainError("neuron: LIF needs 0 <= beta < 1");
}

NeuronState NeuronState::resting(std::size_t batch, std::size_t channels) {
  return {Tensor(Shape{batch, channels}, 0.0), 0};
}

LifStep lif_step(const NeuronConfig& cfg, const NeuronState& state, const Tensor& x_t) {
  cfg.validate();
  require_same_shape(state.v, x_t, "lif_step");
  LifStep out{Tensor(x_t.shape()), Tensor(x_t.shape()), {Tensor(x_t.shape()), state.t + 1}};
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    const Update u = update(cfg, state.v[i], x_t[i]);
    out.s[i] = u.s;
    out.h[i] = u.h;
    out.state.v[i] = u.v;
  }
  out.h.require_finite("lif_step");
  return out;
}

LifTrace lif_sequence(const NeuronConfig& cfg, const Tensor& x) {
  cfg.validate();
  require_rank(x, 3, "lif_sequence");
  const std::size_t steps = length_of(x), lanes = batch_of(x) * channels_of(x);
  LifTrace out{Tensor(x.shape()), Tensor(x.shape()), Tensor(x.shape())};
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    double v = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t i = lane * steps + t;
      const Update u = update(cfg, v, x[i]);
      out.s[i] = u.s;
      out.h[i] = u.h;
      out.v[i] = v = u.v;
    }
  }
  out.h.require_finite("lif_sequence");
  return out;
}

Var lif_forward(Var x, const NeuronConfig& cfg, const SurrogateKind& sg) {
  validate(sg);
  LifTrace trace = lif_sequence(cfg, x.value());
  const Tensor h = trace.h, s = trace.s;
  return x.tape->record("lif", {x}, std::move(trace.s), [cfg, sg, h, s](const Tensor& g) {
    const std::size_t steps = length_of(h), lanes = batch_of(h) * channels_of(h);
    const double decay = cfg.leak == Leak::kIF ? 1.0 : cfg.beta;
    const double drive = cfg.leak == Leak::kIF ? 1.0 : 1.0 - cfg.beta;
    Tensor gx(h.shape());
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      double g_v = 0.0;  // dL/dV_t flowing back from step t + 1
      for (std::size_t t = steps; t-- > 0;) {
        const std::size_t i = lane * steps + t;
        const double sg_d = surrogate_grad(sg, h[i] - cfg.v_th);
        double dv_dh = 1.0;
        switch (cfg.reset) {
          case ResetMode::kHard: dv_dh = 1.0 - s[i] + (cfg.v_reset - h[i]) * sg_d; break;
          case ResetMode::kSoft: dv_dh = 1.0 - cfg.v_th * sg_d; break;
          case ResetMode::kNone: break;
        }
        const double g_h = g[i] * sg_d + g_v * dv_dh;
        gx[i] = drive * g_h;
        g_v = decay * g_h;
      }
    }
    return std::vector<Tensor>{std::move(gx)};
  });
}

Tensor lif_membrane_parallel(const NeuronConfig& cfg, const Tensor& x) {
  cfg.validate();
  require_rank(x, 3, "lif_membrane_parallel");
  if (cfg.reset != ResetMode::kNone) throw DomainError("lif: only reset-free recurrences have a parallel path");
  const std::size_t lanes = batch_of(x) * channels_of(x), steps = length_of(x);
  Tensor a(x.shape(), cfg.leak == Leak::kIF ? 1.0 : cfg.beta);
  Tensor b(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) b[i] = cfg.leak == Leak::kIF ? x[i] : (1.0 - cfg.beta) * x[i];
  Tensor h(x.shape());
  const std::vector<double> h0(lanes, 0.0);
  kernels::affine_scan_parallel(a.data(), b.data(), h0, lanes, steps, kernels::Direction::kForward, h.data());
  return h;
}

std::string to_string(ResetMode mode) {
  switch (mode) {
    case ResetMode::kHard: return "hard";
    case ResetMode::kSoft: return "soft";
    case ResetMode::kNone: return "none";
  }
  return "?";
}

}  // namespace spikescan
