#include "spikescan/scan.hpp"

#include <cmath>
#include <string>

#include "spikescan/kernels/scan.hpp"

namespace spikescan {

namespace {

void validate(const ScanProblem& p) {
  require_rank(p.x, 3, "scan");
  require_same_shape(p.alpha, p.x, "scan alpha/x");
  if (!(p.h0.shape() == Shape{batch_of(p.x), channels_of(p.x)}))
    throw ShapeError("scan: h0 must be [B x C], got " + p.h0.shape().str());
}

// Smallest running product the explicit form may divide by.
constexpr double kMinRunningProduct = 1e-250;

}  // namespace

ScanProblem::ScanProblem(Tensor a, Tensor xs)
    : alpha(std::move(a)), x(std::move(xs)), h0(Shape{batch_of(x), channels_of(x)}, 0.0) {
  validate(*this);
}

ScanProblem::ScanProblem(Tensor a, Tensor xs, Tensor init) : alpha(std::move(a)), x(std::move(xs)), h0(std::move(init)) {
  validate(*this);
}

Tensor scan_serial(const ScanProblem& p) {
  validate(p);
  Tensor h(p.x.shape());
  const std::size_t steps = p.steps();
  for (std::size_t lane = 0; lane < p.lanes(); ++lane) {
    double state = p.h0[lane];
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t i = lane * steps + t;
      state = p.alpha[i] * state + (1.0 - p.alpha[i]) * p.x[i];
      h[i] = state;
    }
  }
  return h;
}

Tensor scan_parallel(const ScanProblem& p) {
  validate(p);
  Tensor drive(p.x.shape());
  for (std::size_t i = 0; i < drive.size(); ++i) drive[i] = (1.0 - p.alpha[i]) * p.x[i];
  Tensor h(p.x.shape());
  kernels::affine_scan_parallel(p.alpha.data(), drive.data(), p.h0.data(), p.lanes(), p.steps(),
                                kernels::Direction::kForward, h.data());
  return h;
}

ScanGrads scan_backward(const ScanProblem& p, const Tensor& h, const Tensor& d_h, Execution exec) {
  validate(p);
  require_same_shape(h, p.x, "scan_backward H");
  require_same_shape(d_h, p.x, "scan_backward dH");
  const std::size_t steps = p.steps();
  const std::size_t lanes = p.lanes();

  // Reverse recurrence g_t = alpha_{t+1} g_{t+1} + dH_t with g_{T+1} = 0.
  Tensor next_alpha(p.x.shape());
  for (std::size_t lane = 0; lane < lanes; ++lane)
    for (std::size_t t = 0; t < steps; ++t)
      next_alpha[lane * steps + t] = t + 1 < steps ? p.alpha[lane * steps + t + 1] : 0.0;
  Tensor g(p.x.shape());
  const Tensor zeros(Shape{lanes}, 0.0);
  if (exec == Execution::kSerial)
    kernels::affine_scan_serial(next_alpha.data(), d_h.data(), zeros.data(), lanes, steps,
                                kernels::Direction::kReverse, g.data());
  else
    kernels::affine_scan_parallel(next_alpha.data(), d_h.data(), zeros.data(), lanes, steps,
                                  kernels::Direction::kReverse, g.data());

  ScanGrads out{Tensor(p.x.shape()), Tensor(p.x.shape()), Tensor(p.h0.shape())};
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t i = lane * steps + t;
      const double prev = t == 0 ? p.h0[lane] : h[i - 1];
      out.d_alpha[i] = g[i] * (prev - p.x[i]);
      out.d_x[i] = g[i] * (1.0 - p.alpha[i]);
    }
    out.d_h0[lane] = steps == 0 ? 0.0 : g[lane * steps] * p.alpha[lane * steps];
  }
  return out;
}

Tensor transition_matrix(std::span<const double> alpha, double alpha_min) {
  if (!(alpha_min >= kMatrixFormAlphaMin) || alpha_min >= 0.5)
    throw DomainError("matrix form: alpha_min must lie in [0.05, 0.5)");
  const std::size_t steps = alpha.size();
  if (steps > kMatrixFormMaxSteps)
    throw StabilityGuard("matrix form: T=" + std::to_string(steps) + " exceeds " +
                         std::to_string(kMatrixFormMaxSteps));
  for (double a : alpha)
    if (!(a >= alpha_min && a <= 1.0 - alpha_min))
      throw StabilityGuard("matrix form: alpha=" + std::to_string(a) + " outside guard band [" +
                           std::to_string(alpha_min) + ", " + std::to_string(1.0 - alpha_min) + "]");

  std::vector<double> running(steps);  // P_j
  double prod = 1.0;
  for (std::size_t j = 0; j < steps; ++j) running[j] = prod *= alpha[j];
  if (steps > 0 && running.back() < kMinRunningProduct)
    throw StabilityGuard("matrix form: running product of alphas underflows");

  Tensor w(Shape{steps, steps}, 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    const double left = (1.0 - alpha[i]) / running[i];  // ((1 - A) / P)_i
    for (std::size_t j = i; j < steps; ++j) w.at(i, j) = left * running[j];
  }
  return w;
}

Tensor matrix_form(const ScanProblem& p, double alpha_min) {
  validate(p);
  const std::size_t steps = p.steps();
  Tensor h(p.x.shape());
  for (std::size_t lane = 0; lane < p.lanes(); ++lane) {
    std::span<const double> alpha = p.alpha.data().subspan(lane * steps, steps);
    const Tensor w = transition_matrix(alpha, alpha_min);
    double running = 1.0;
    for (std::size_t j = 0; j < steps; ++j) {
      running *= alpha[j];
      double acc = running * p.h0[lane];
      for (std::size_t i = 0; i <= j; ++i) acc += p.x[lane * steps + i] * w.at(i, j);
      h[lane * steps + j] = acc;
    }
  }
  return h;
}

Var scan(Var alpha, Var x, const Tensor& h0, Execution exec) {
  ScanProblem problem(alpha.value(), x.value(), h0);
  Tensor h = exec == Execution::kSerial ? scan_serial(problem) : scan_parallel(problem);
  Tensor saved_h = h;
  return x.tape->record("scan", {alpha, x}, std::move(h),
                        [problem = std::move(problem), saved_h, exec](const Tensor& g) {
                          ScanGrads grads = scan_backward(problem, saved_h, g, exec);
                          return std::vector<Tensor>{std::move(grads.d_alpha), std::move(grads.d_x)};
                        });
}

Var scan(Var alpha, Var x, Execution exec) {
  const Shape& s = x.shape();
  return scan(alpha, x, Tensor(Shape{s[0], s[1]}, 0.0), exec);
}

}  // namespace spikescan
