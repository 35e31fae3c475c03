#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "edlab/dynsys.hpp"
#include "edlab/errors.hpp"
#include "edlab/quadrature.hpp"
#include "edlab/rng.hpp"
#include "edlab/summation.hpp"

namespace edlab {

/// Finitely supported probability measure: sum_i w_i delta_{p_i}.
struct AtomicMeasure {
  std::vector<PhasePoint> points;
  std::vector<double> weights;
};

/// Probability measure with a density, carried together with the rule
/// used to integrate against it. The density must be positive wherever
/// the rule places nodes.
struct AbsContinuousMeasure {
  std::function<double(const PhasePoint&)> density;
  QuadratureRule quad;

  AbsContinuousMeasure(std::function<double(const PhasePoint&)> density_fn, QuadratureRule rule)
      : density(std::move(density_fn)), quad(std::move(rule)) {}
};

/// Equal-weight empirical measure along a stored forward orbit. The full
/// orbit including the burn-in prefix is kept: entries before `burn_in`
/// are not sample points, but they are exact preimages of the ones after,
/// which evaluators of backward-horizon observables rely on.
struct EmpiricalMeasure {
  std::vector<PhasePoint> orbit;
  std::size_t burn_in = 0;

  std::size_t samples() const { return orbit.size() - burn_in; }
};

using StationaryMeasure = std::variant<AtomicMeasure, AbsContinuousMeasure, EmpiricalMeasure>;

/// Validate and normalize atomic data: weights nonnegative with positive
/// total, rescaled to sum to exactly 1 in the stored representation.
inline AtomicMeasure atomic_measure(std::vector<PhasePoint> points, std::vector<double> weights) {
  if (points.empty() || points.size() != weights.size())
    throw DegenerateParameterError("atomic measure needs matching nonempty point and weight lists");
  CompensatedSum total;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DegenerateParameterError("atomic weights must be nonnegative");
    total.add(w);
  }
  const double z = total.value();
  if (!(z > 0.0)) throw DegenerateParameterError("atomic weights must have positive total");
  for (double& w : weights) w /= z;
  AtomicMeasure m;
  m.points = std::move(points);
  for (PhasePoint& p : m.points) p = wrap(p);
  m.weights = std::move(weights);
  return m;
}

/// Point mass at x.
inline AtomicMeasure dirac(const PhasePoint& x) { return atomic_measure({x}, {1.0}); }

/// Divide a raw nonnegative density by its mass under the given rule.
/// The normalizer is frozen at construction, so repeated application is
/// idempotent up to one rounding.
inline AbsContinuousMeasure normalize_density(std::function<double(const PhasePoint&)> raw,
                                              const QuadratureRule& quad) {
  const double mass = quad.integrate([&](const PhasePoint& p) {
    const double v = raw(p);
    if (!(v > 0.0)) throw NonpositiveDensityError(p, v);
    return v;
  });
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw DegenerateParameterError("density mass under the rule is " + std::to_string(mass) +
                                   "; a positive finite mass is required");
  return AbsContinuousMeasure(
      [raw = std::move(raw), mass](const PhasePoint& p) { return raw(p) / mass; }, quad);
}

/// Forward-orbit empirical measure: burn_in steps discarded as samples,
/// then `samples` consecutive points retained. Deterministic given seed;
/// an explicit start overrides the seeded uniform draw. Systems that
/// provide a resampled forward step (see DiscreteSystem) are stepped
/// with it, so hyperbolic orbits keep their statistics over horizons far
/// beyond the 53-step mantissa budget of the plain map.
inline EmpiricalMeasure birkhoff_empirical(const DiscreteSystem& sys,
                                           std::optional<PhasePoint> start, std::size_t burn_in,
                                           std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw DegenerateParameterError("empirical measure needs samples >= 1");
  std::mt19937_64 rng(seed);
  PhasePoint x = start ? wrap(*start) : uniform_point(sys.domain, rng);
  EmpiricalMeasure m;
  m.burn_in = burn_in;
  m.orbit.reserve(burn_in + samples);
  m.orbit.push_back(x);
  for (std::size_t i = 1; i < burn_in + samples; ++i) {
    x = sys.resampled_forward ? wrap(sys.resampled_forward(x, rng)) : wrap(sys.forward(x));
    m.orbit.push_back(x);
  }
  return m;
}

namespace detail {

template <class H>
double guarded_eval(H&& h, const PhasePoint& p) {
  try {
    return h(p);
  } catch (const EvaluationError&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(p, e.what());
  }
}

}  // namespace detail

/// Expectation of an observable under the measure. Always a compensated
/// sum in a fixed traversal order, so results are bit-stable run to run.
/// Evaluation failures surface as EvaluationError with the point attached.
template <class H>
double expect(const StationaryMeasure& nu, H&& h) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, AtomicMeasure>) {
          CompensatedSum acc;
          for (std::size_t i = 0; i < m.points.size(); ++i)
            acc.add(m.weights[i] * detail::guarded_eval(h, m.points[i]));
          return acc.value();
        } else if constexpr (std::is_same_v<M, AbsContinuousMeasure>) {
          return m.quad.integrate([&](const PhasePoint& p) {
            return m.density(p) * detail::guarded_eval(h, p);
          });
        } else {
          CompensatedSum acc;
          for (std::size_t i = m.burn_in; i < m.orbit.size(); ++i)
            acc.add(detail::guarded_eval(h, m.orbit[i]));
          return acc.value() / static_cast<double>(m.samples());
        }
      },
      nu);
}

}  // namespace edlab
