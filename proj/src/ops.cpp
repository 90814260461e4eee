#include "spikescan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikescan/kernels/conv.hpp"
#include "spikescan/kernels/gemm.hpp"

namespace spikescan {

namespace {

// Sum `g` down to `shape` when the forward pass broadcast a scalar operand.
Tensor reduce_to(const Tensor& g, const Shape& shape) {
  if (g.shape() == shape) return g;
  return Tensor(shape, g.sum());
}

Tensor map(const Tensor& a, auto&& f) {
  Tensor out(a.shape());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

}  // namespace

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clip_round_scalar(double h, int n_max) {
  return std::clamp(std::round(h), 0.0, static_cast<double>(n_max));
}

Var elementwise(BinaryOp op, Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool a_scalar = av.size() == 1;
  const bool b_scalar = bv.size() == 1;
  if (!(av.shape() == bv.shape()) && !a_scalar && !b_scalar)
    throw ShapeError("elementwise: shapes " + av.shape().str() + " and " + bv.shape().str() + " do not broadcast");
  const Shape out_shape = (av.shape() == bv.shape() || b_scalar) ? av.shape() : bv.shape();
  const std::size_t n = out_shape.numel();
  auto ai = [&](std::size_t i) { return a_scalar ? av[0] : av[i]; };
  auto bi = [&](std::size_t i) { return b_scalar ? bv[0] : bv[i]; };

  if (op == BinaryOp::kDiv)
    for (std::size_t i = 0; i < bv.size(); ++i)
      if (bv[i] == 0.0) throw DomainError("elementwise: division by zero");

  Tensor out(out_shape);
  for (std::size_t i = 0; i < n; ++i) {
    switch (op) {
      case BinaryOp::kAdd: out[i] = ai(i) + bi(i); break;
      case BinaryOp::kSub: out[i] = ai(i) - bi(i); break;
      case BinaryOp::kMul: out[i] = ai(i) * bi(i); break;
      case BinaryOp::kDiv: out[i] = ai(i) / bi(i); break;
    }
  }

  static constexpr const char* kNames[] = {"add", "sub", "mul", "div"};
  Tensor a_saved = av, b_saved = bv;
  return a.tape->record(
      kNames[static_cast<int>(op)], {a, b}, std::move(out),
      [op, a_saved, b_saved, a_scalar, b_scalar, out_shape](const Tensor& g) {
        const std::size_t n = g.size();
        auto ai = [&](std::size_t i) { return a_scalar ? a_saved[0] : a_saved[i]; };
        auto bi = [&](std::size_t i) { return b_scalar ? b_saved[0] : b_saved[i]; };
        Tensor ga(out_shape), gb(out_shape);
        for (std::size_t i = 0; i < n; ++i) {
          switch (op) {
            case BinaryOp::kAdd: ga[i] = g[i]; gb[i] = g[i]; break;
            case BinaryOp::kSub: ga[i] = g[i]; gb[i] = -g[i]; break;
            case BinaryOp::kMul: ga[i] = g[i] * bi(i); gb[i] = g[i] * ai(i); break;
            case BinaryOp::kDiv:
              ga[i] = g[i] / bi(i);
              gb[i] = -g[i] * ai(i) / (bi(i) * bi(i));
              break;
          }
        }
        return std::vector<Tensor>{reduce_to(ga, a_saved.shape()), reduce_to(gb, b_saved.shape())};
      });
}

Var elementwise(BinaryOp op, Var a, double b) {
  return elementwise(op, a, a.tape->constant(Tensor::scalar(b)));
}

Var sigmoid(Var a) {
  Tensor out = map(a.value(), sigmoid_scalar);
  Tensor y = out;
  return a.tape->record("sigmoid", {a}, std::move(out), [y](const Tensor& g) {
    Tensor ga(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * y[i] * (1.0 - y[i]);
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var relu(Var a) {
  Tensor x = a.value();
  Tensor out = map(x, [](double v) { return v > 0 ? v : 0.0; });
  return a.tape->record("relu", {a}, std::move(out), [x](const Tensor& g) {
    Tensor ga(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] = x[i] > 0 ? g[i] : 0.0;
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var pow(Var a, double exponent) {
  const Tensor& x = a.value();
  const bool integral = exponent == std::floor(exponent);
  if (!integral)
    for (double v : x.data())
      if (v < 0) throw DomainError("pow: negative base with non-integer exponent");
  Tensor out = map(x, [exponent](double v) { return std::pow(v, exponent); });
  Tensor saved = x;
  return a.tape->record("pow", {a}, std::move(out), [saved, exponent](const Tensor& g) {
    Tensor ga(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i)
      ga[i] = exponent == 1.0 ? g[i] : g[i] * exponent * std::pow(saved[i], exponent - 1.0);
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank(av, 2, "matmul");
  require_rank(bv, 2, "matmul");
  const std::size_t m = av.shape()[0], k = av.shape()[1], n = bv.shape()[1];
  if (bv.shape()[0] != k)
    throw ShapeError("matmul: inner dimensions differ " + av.shape().str() + " x " + bv.shape().str());
  Tensor out(Shape{m, n});
  kernels::gemm_parallel(kernels::Trans::kNo, kernels::Trans::kNo, m, n, k, av.data(), bv.data(), out.data());
  Tensor as = av, bs = bv;
  return a.tape->record("matmul", {a, b}, std::move(out), [as, bs, m, n, k](const Tensor& g) {
    Tensor ga(Shape{m, k}), gb(Shape{k, n});
    kernels::gemm_parallel(kernels::Trans::kNo, kernels::Trans::kYes, m, k, n, g.data(), bs.data(), ga.data());
    kernels::gemm_parallel(kernels::Trans::kYes, kernels::Trans::kNo, k, n, m, as.data(), g.data(), gb.data());
    return std::vector<Tensor>{std::move(ga), std::move(gb)};
  });
}

Var spike_threshold(Var h, double v_th, const SurrogateKind& sg) {
  validate(sg);
  if (!std::isfinite(v_th)) throw DomainError("spike_threshold: v_th must be finite");
  Tensor x = h.value();
  Tensor out = map(x, [v_th](double v) { return heaviside(v - v_th); });
  return h.tape->record("spike_threshold", {h}, std::move(out), [x, v_th, sg](const Tensor& g) {
    Tensor gh(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) gh[i] = g[i] * surrogate_grad(sg, x[i] - v_th);
    return std::vector<Tensor>{std::move(gh)};
  });
}

Var spike_relaxed(Var h, double v_th, const SurrogateKind& sg) {
  validate(sg);
  Tensor x = h.value();
  Tensor out = map(x, [v_th, &sg](double v) { return surrogate_primitive(sg, v - v_th); });
  return h.tape->record("spike_relaxed", {h}, std::move(out), [x, v_th, sg](const Tensor& g) {
    Tensor gh(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) gh[i] = g[i] * surrogate_grad(sg, x[i] - v_th);
    return std::vector<Tensor>{std::move(gh)};
  });
}

Var clip_round(Var h, int n_max) {
  if (n_max < 1) throw DomainError("clip_round: n_max must be >= 1");
  Tensor x = h.value();
  Tensor out = map(x, [n_max](double v) { return clip_round_scalar(v, n_max); });
  return h.tape->record("clip_round", {h}, std::move(out), [x, n_max](const Tensor& g) {
    Tensor gh(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) gh[i] = (x[i] >= 0.0 && x[i] <= n_max) ? g[i] : 0.0;
    return std::vector<Tensor>{std::move(gh)};
  });
}

Var sum(Var a) {
  const Shape in_shape = a.shape();
  return a.tape->record("sum", {a}, Tensor::scalar(a.value().sum()), [in_shape](const Tensor& g) {
    return std::vector<Tensor>{Tensor(in_shape, g[0])};
  });
}

Var mean(Var a) {
  const Shape in_shape = a.shape();
  const double n = static_cast<double>(in_shape.numel());
  return a.tape->record("mean", {a}, Tensor::scalar(a.value().sum() / n), [in_shape, n](const Tensor& g) {
    return std::vector<Tensor>{Tensor(in_shape, g[0] / n)};
  });
}

Var mse(Var a, const Tensor& target) {
  require_same_shape(a.value(), target, "mse");
  const Tensor& x = a.value();
  Tensor diff(x.shape());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff[i] = x[i] - target[i];
    acc += diff[i] * diff[i];
  }
  const double n = static_cast<double>(x.size());
  return a.tape->record("mse", {a}, Tensor::scalar(acc / n), [diff, n](const Tensor& g) {
    Tensor ga(diff.shape());
    for (std::size_t i = 0; i < diff.size(); ++i) ga[i] = g[0] * 2.0 * diff[i] / n;
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Tensor& z = logits.value();
  require_rank(z, 2, "softmax_cross_entropy");
  const std::size_t batch = z.shape()[0], classes = z.shape()[1];
  if (labels.size() != batch) throw ShapeError("softmax_cross_entropy: label count differs from batch");
  Tensor prob(z.shape());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= classes)
      throw DomainError("softmax_cross_entropy: label out of range");
    double mx = z.at(b, 0);
    for (std::size_t k = 1; k < classes; ++k) mx = std::max(mx, z.at(b, k));
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(z.at(b, k) - mx);
    for (std::size_t k = 0; k < classes; ++k) prob.at(b, k) = std::exp(z.at(b, k) - mx) / denom;
    loss -= (z.at(b, static_cast<std::size_t>(labels[b])) - mx) - std::log(denom);
  }
  std::vector<int> lab(labels.begin(), labels.end());
  return logits.tape->record(
      "softmax_cross_entropy", {logits}, Tensor::scalar(loss / static_cast<double>(batch)),
      [prob, lab, batch, classes](const Tensor& g) {
        Tensor gz = prob;
        for (std::size_t b = 0; b < batch; ++b) {
          gz.at(b, static_cast<std::size_t>(lab[b])) -= 1.0;
          for (std::size_t k = 0; k < classes; ++k) gz.at(b, k) *= g[0] / static_cast<double>(batch);
        }
        return std::vector<Tensor>{std::move(gz)};
      });
}

Var reshape(Var a, Shape shape) {
  const Shape in_shape = a.shape();
  return a.tape->record("reshape", {a}, a.value().reshaped(shape), [in_shape](const Tensor& g) {
    return std::vector<Tensor>{g.reshaped(in_shape)};
  });
}

Var conv1d(Var x, Var w, std::optional<Var> bias, std::size_t pad_left) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  require_rank(xv, 3, "conv1d input");
  const bool depthwise = wv.rank() == 2;
  if (!depthwise) require_rank(wv, 3, "conv1d weight");
  kernels::ConvGeometry geo;
  geo.batch = batch_of(xv);
  geo.c_in = channels_of(xv);
  geo.steps = length_of(xv);
  geo.c_out = wv.shape()[0];
  geo.k = wv.shape()[wv.rank() - 1];
  geo.pad_left = pad_left;
  geo.depthwise = depthwise;
  if (!depthwise && wv.shape()[1] != geo.c_in)
    throw ShapeError("conv1d: weight " + wv.shape().str() + " does not match input " + xv.shape().str());
  if (depthwise && geo.c_out != geo.c_in)
    throw ShapeError("conv1d: depthwise weight " + wv.shape().str() + " does not match input " + xv.shape().str());
  if (bias && !(bias->shape() == Shape{geo.c_out}))
    throw ShapeError("conv1d: bias must be [" + std::to_string(geo.c_out) + "]");

  Tensor out(Shape{geo.batch, geo.c_out, geo.steps});
  const Tensor no_bias;
  kernels::conv1d_forward_parallel(geo, xv.data(), wv.data(), bias ? bias->value().data() : no_bias.data(),
                                   out.data());
  std::vector<Var> inputs{x, w};
  if (bias) inputs.push_back(*bias);
  Tensor xs = xv, ws = wv;
  const bool has_bias = bias.has_value();
  return x.tape->record("conv1d", std::move(inputs), std::move(out), [geo, xs, ws, has_bias](const Tensor& g) {
    std::vector<Tensor> grads{Tensor(xs.shape()), Tensor(ws.shape())};
    if (has_bias) grads.emplace_back(Shape{geo.c_out});
    kernels::conv1d_backward_parallel(geo, xs.data(), ws.data(), g.data(), grads[0].data(), grads[1].data(),
                                      has_bias ? grads[2].data() : std::span<double>{});
    return grads;
  });
}

Var time_mean(Var x) {
  const Tensor& xv = x.value();
  require_rank(xv, 3, "time_mean");
  const std::size_t rows = batch_of(xv) * channels_of(xv), steps = length_of(xv);
  if (steps == 0) throw ShapeError("time_mean: empty time axis");
  Tensor out(Shape{batch_of(xv), channels_of(xv)});
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t t = 0; t < steps; ++t) acc += xv[r * steps + t];
    out[r] = acc / static_cast<double>(steps);
  }
  const Shape in_shape = xv.shape();
  return x.tape->record("time_mean", {x}, std::move(out), [in_shape, rows, steps](const Tensor& g) {
    Tensor gx(in_shape);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t t = 0; t < steps; ++t) gx[r * steps + t] = g[r] / static_cast<double>(steps);
    return std::vector<Tensor>{std::move(gx)};
  });
}

}  // namespace spikescan
