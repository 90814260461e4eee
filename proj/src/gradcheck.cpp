#include "spikescan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace spikescan {

namespace {

double evaluate(const TapedFunction& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> leaves;
  for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t));
  const Var out = f(tape, leaves);
  if (out.value().size() != 1) throw ShapeError("grad_check: function must return a scalar");
  const double v = out.value()[0];
  if (!std::isfinite(v)) throw NonFiniteError("grad_check: non-finite function value");
  return v;
}

}  // namespace

double grad_check(const TapedFunction& f, std::span<const Tensor> inputs, double eps) {
  std::vector<Tensor> point(inputs.begin(), inputs.end());

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& t : point) leaves.push_back(tape.leaf(t));
    const Var out = f(tape, leaves);
    tape.backward(out);
    for (const Var& v : leaves) analytic.push_back(v.grad());
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < point.size(); ++k) {
    for (std::size_t i = 0; i < point[k].size(); ++i) {
      const double x0 = point[k][i];
      point[k][i] = x0 + eps;
      const double up = evaluate(f, point);
      point[k][i] = x0 - eps;
      const double down = evaluate(f, point);
      point[k][i] = x0;
      const double fd = (up - down) / (2 * eps);
      worst = std::max(worst, std::abs(fd - analytic[k][i]) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double eps) {
  const Tensor inputs[] = {x};
  return grad_check([&f](Tape& t, std::span<const Var> v) { return f(t, v[0]); }, inputs, eps);
}

}  // namespace spikescan
