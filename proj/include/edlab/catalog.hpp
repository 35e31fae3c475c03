#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "edlab/dynsys.hpp"
#include "edlab/errors.hpp"
#include "edlab/format.hpp"
#include "edlab/measures.hpp"
#include "edlab/quadrature.hpp"

namespace edlab {

/// Circle flow dx/dt = omega - sin x on [-pi, pi). For |omega| < 1 it has
/// an attracting fixed point x+ = asin(omega) and a repelling one
/// x- = pi - asin(omega); for |omega| > 1 it circulates with a smooth
/// invariant density proportional to 1/|v|. The reflection x -> pi - x
/// reverses time and swaps the fixed points.
inline ContinuousSystem make_circle_flow(double omega) {
  ContinuousSystem sys;
  sys.domain = Domain::circle;
  sys.name = "circle{" + format_double(omega) + "}";
  sys.vector_field = [omega](const PhasePoint& p) -> Velocity {
    return {omega - std::sin(p[0]), 0.0};
  };
  sys.divergence = [](const PhasePoint& p) { return -std::cos(p[0]); };
  sys.reversal = [](const PhasePoint& p) {
    return circle_point(std::numbers::pi - p[0]);
  };
  return sys;
}

/// (attracting, repelling) fixed points of the circle flow, or nullopt
/// when |omega| > 1 and none exist. At |omega| = 1 the two merge into the
/// single marginal point sign(omega) * pi/2, returned in both slots.
inline std::optional<std::pair<double, double>> circle_fixed_points(double omega) {
  if (std::fabs(omega) > 1.0) return std::nullopt;
  const double xp = std::asin(omega);
  const double xm = wrap_angle(std::numbers::pi - xp);
  return std::make_pair(xp, xm);
}

/// Exponential growth rate of the density at the attractor:
/// sqrt(1 - omega^2) in the fixed-point regime, 0 once the flow
/// circulates (|omega| >= 1) and the smooth invariant density takes over.
inline double circle_K_closed_form(double omega) {
  if (std::fabs(omega) >= 1.0) return 0.0;
  return std::sqrt(1.0 - omega * omega);
}

/// The physical stationary measure of the circle flow. For |omega| < 1
/// this is the point mass at the attractor (or at the repeller when
/// `backward` asks for the time-reversed flow's attractor); for
/// |omega| > 1 it is the normalized density 1/|v| integrated with the
/// supplied rule. |omega| = 1 has no hyperbolic attractor and is refused.
inline StationaryMeasure circle_stationary(double omega, const QuadratureRule& quad,
                                           bool backward = false) {
  const double a = std::fabs(omega);
  if (a == 1.0)
    throw DegenerateParameterError(
        "circle flow at |omega| = 1 has only a marginal fixed point; no hyperbolic "
        "stationary measure to select");
  if (a < 1.0) {
    const auto fp = circle_fixed_points(omega);
    return dirac(circle_point(backward ? fp->second : fp->first));
  }
  auto raw = [omega](const PhasePoint& p) { return 1.0 / std::fabs(omega - std::sin(p[0])); };
  return normalize_density(raw, quad);
}

/// Mass of the unnormalized circulating density 1/|v|, in closed form:
/// 2 pi / sqrt(omega^2 - 1). Only defined for |omega| > 1.
inline double circle_invariant_density_norm(double omega) {
  if (!(std::fabs(omega) > 1.0))
    throw DegenerateParameterError("closed-form density norm needs |omega| > 1");
  return 2.0 * std::numbers::pi / std::sqrt(omega * omega - 1.0);
}

/// Rotation period of the circulating flow, 2 pi / sqrt(omega^2 - 1);
/// densities evolve periodically with exactly this period.
inline double circle_rotation_period(double omega) {
  if (!(std::fabs(omega) > 1.0))
    throw DegenerateParameterError("rotation period needs |omega| > 1");
  return 2.0 * std::numbers::pi / std::sqrt(omega * omega - 1.0);
}

/// Parameter records for the named catalog entries.
struct CircleFlowSpec {
  double omega = 0.5;
  bool operator==(const CircleFlowSpec&) const = default;
};
struct BakerSpec {
  double contraction = 0.5;
  bool operator==(const BakerSpec&) const = default;
};
using SystemSpec = std::variant<CircleFlowSpec, BakerSpec>;

/// Baker map on the unit square with contraction a in (0, 1/2]:
///
///   (x, y) -> (2x,     a y)        for x < 1/2
///   (x, y) -> (2x - 1, a y + 1/2)  for x >= 1/2
///
/// Uniformly hyperbolic and invertible onto its image, the two horizontal
/// strips [0,a) and [1/2, 1/2+a). a = 1/2 is the volume-preserving
/// classical map; smaller a contracts volume by 2a per step, so the
/// inverse expands it and log_jac_inverse = -log(2a) everywhere.
inline DiscreteSystem make_baker(double a) {
  if (!(a > 0.0) || a > 0.5)
    throw DegenerateParameterError("baker contraction must lie in (0, 1/2], got " +
                                   format_double(a));
  DiscreteSystem sys;
  sys.domain = Domain::unit_square;
  sys.name = "baker{" + format_double(a) + "}";
  sys.forward = [a](const PhasePoint& p) {
    const double x = p[0], y = p[1];
    if (x < 0.5) return PhasePoint{Domain::unit_square, {2.0 * x, a * y}};
    return PhasePoint{Domain::unit_square, {2.0 * x - 1.0, a * y + 0.5}};
  };
  sys.inverse = [a](const PhasePoint& p) -> std::optional<PhasePoint> {
    const double x = p[0], y = p[1];
    if (y < a) return PhasePoint{Domain::unit_square, {x / 2.0, y / a}};
    // y - 0.5 is exact for y in [0.5, 1): Sterbenz subtraction
    if (y >= 0.5 && y < 0.5 + a)
      return PhasePoint{Domain::unit_square, {(x + 1.0) / 2.0, (y - 0.5) / a}};
    return std::nullopt;
  };
  sys.log_jac_inverse = [lj = -std::log(2.0 * a)](const PhasePoint&) { return lj; };
  // The doubling in x shifts one bit out of the mantissa per step, so a
  // long plain orbit decays onto the 2^-53 lattice and finally the fixed
  // point at the origin. For sampling, refill that vacated bit from the
  // stream: on the 2^-53 grid the doubled value is a multiple of 2^-52,
  // making the add exact, and y is untouched.
  sys.resampled_forward = [forward = sys.forward](const PhasePoint& p, std::mt19937_64& rng) {
    PhasePoint q = forward(p);
    q[0] += static_cast<double>(rng() >> 63) * 0x1.0p-53;
    return q;
  };
  return sys;
}

inline DiscreteSystem make_baker(const BakerSpec& spec) { return make_baker(spec.contraction); }

inline AnySystem make_system(const SystemSpec& spec) {
  if (const auto* c = std::get_if<CircleFlowSpec>(&spec)) return make_circle_flow(c->omega);
  return make_baker(std::get<BakerSpec>(spec).contraction);
}

inline std::string format_system_name(const SystemSpec& spec) {
  if (const auto* c = std::get_if<CircleFlowSpec>(&spec))
    return "circle{" + format_double(c->omega) + "}";
  return "baker{" + format_double(std::get<BakerSpec>(spec).contraction) + "}";
}

/// Parse "circle{omega}" / "baker{a}" back into a parameter record.
inline SystemSpec parse_system_name(std::string_view name) {
  const auto open = name.find('{');
  const auto close = name.rfind('}');
  if (open == std::string_view::npos || close != name.size() - 1 || close <= open + 1)
    throw ConfigValueError("system name '" + std::string(name) +
                           "' is not of the form kind{parameter}");
  const std::string_view kind = name.substr(0, open);
  const std::string param(name.substr(open + 1, close - open - 1));
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(param, &used);
    if (used != param.size()) throw std::invalid_argument(param);
  } catch (const std::exception&) {
    throw ConfigValueError("system parameter '" + param + "' is not a number");
  }
  if (kind == "circle") return CircleFlowSpec{value};
  if (kind == "baker") return BakerSpec{value};
  throw ConfigValueError("unknown system kind '" + std::string(kind) + "'");
}

struct CatalogEntry {
  std::string pattern;
  std::string summary;
};

inline std::vector<CatalogEntry> catalog_entries() {
  return {
      {"circle{omega}",
       "flow dx/dt = omega - sin x on [-pi, pi); point attractor for |omega| < 1, "
       "circulating with smooth invariant density for |omega| > 1; reversible via x -> pi - x"},
      {"baker{a}",
       "baker map on the unit square, contraction a in (0, 1/2]; volume-preserving at "
       "a = 1/2, dissipative with an SRB attractor for smaller a"},
  };
}

}  // namespace edlab
