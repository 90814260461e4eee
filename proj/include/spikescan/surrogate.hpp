#pragma once

#include <string>
#include <variant>

namespace spikescan {

// Boxcar of total width `width` centred on the threshold, height 1/width.
struct Rectangular {
  double width = 1.0;
};

// Arc-tangent surrogate in the form used by SpikingJelly's `ATan`:
//   primitive  g(u)  = atan(pi/2 * slope * u) / pi + 1/2
//   gradient   g'(u) = (slope / 2) / (1 + (pi/2 * slope * u)^2)
struct ArcTangent {
  double slope = 2.0;
};

// Passes the upstream gradient through unchanged.
struct StraightThrough {};

using SurrogateKind = std::variant<Rectangular, ArcTangent, StraightThrough>;

// Throws DomainError for width <= 0 or slope <= 0.
void validate(const SurrogateKind& sg);

// d/du of the smooth stand-in for Heaviside(u), u = h - v_th.
double surrogate_grad(const SurrogateKind& sg, double u);

// The smooth function whose derivative is surrogate_grad. Used to check
// surrogate backward passes against finite differences.
double surrogate_primitive(const SurrogateKind& sg, double u);

std::string to_string(const SurrogateKind& sg);
SurrogateKind parse_surrogate(const std::string& name);

}  // namespace spikescan
