#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spikescan/tape.hpp"

namespace spikescan {

// A scalar-valued function built on a fresh tape from leaf variables.
using TapedFunction = std::function<Var(Tape&, std::span<const Var>)>;

// Central finite differences against the tape gradient, over every
// coordinate of every input. Returns max |g_fd - g_tape| / max(1, |g_fd|).
// Throws NonFiniteError if any evaluation is non-finite.
double grad_check(const TapedFunction& f, std::span<const Tensor> inputs, double eps);

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double eps);

}  // namespace spikescan
