#include "spikescan/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spikescan/error.hpp"

namespace spikescan {

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

void validate(const SurrogateKind& sg) {
  std::visit(Overloaded{
                 [](const Rectangular& r) {
                   if (!(r.width > 0)) throw DomainError("rectangular surrogate width must be > 0");
                 },
                 [](const ArcTangent& a) {
                   if (!(a.slope > 0)) throw DomainError("arctan surrogate slope must be > 0");
                 },
                 [](const StraightThrough&) {},
             },
             sg);
}

double surrogate_grad(const SurrogateKind& sg, double u) {
  return std::visit(Overloaded{
                        [u](const Rectangular& r) { return std::abs(u) < r.width / 2 ? 1.0 / r.width : 0.0; },
                        [u](const ArcTangent& a) {
                          const double z = std::numbers::pi / 2 * a.slope * u;
                          return a.slope / 2 / (1 + z * z);
                        },
                        [](const StraightThrough&) { return 1.0; },
                    },
                    sg);
}

double surrogate_primitive(const SurrogateKind& sg, double u) {
  return std::visit(Overloaded{
                        [u](const Rectangular& r) { return std::clamp(u / r.width + 0.5, 0.0, 1.0); },
                        [u](const ArcTangent& a) {
                          return std::atan(std::numbers::pi / 2 * a.slope * u) / std::numbers::pi + 0.5;
                        },
                        [u](const StraightThrough&) { return u + 0.5; },
                    },
                    sg);
}

std::string to_string(const SurrogateKind& sg) {
  return std::visit(Overloaded{
                        [](const Rectangular& r) { return "rect(" + std::to_string(r.width) + ")"; },
                        [](const ArcTangent& a) { return "atan(" + std::to_string(a.slope) + ")"; },
                        [](const StraightThrough&) { return std::string("ste"); },
                    },
                    sg);
}

SurrogateKind parse_surrogate(const std::string& name) {
  if (name == "rect") return Rectangular{};
  if (name == "atan") return ArcTangent{};
  if (name == "ste") return StraightThrough{};
  throw DomainError("unknown surrogate '" + name + "' (expected rect, atan or ste)");
}

}  // namespace spikescan
