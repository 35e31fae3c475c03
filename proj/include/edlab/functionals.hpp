#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "edlab/catalog.hpp"
#include "edlab/dynsys.hpp"
#include "edlab/errors.hpp"
#include "edlab/measures.hpp"
#include "edlab/quadrature.hpp"
#include "edlab/summation.hpp"
#include "edlab/time_series.hpp"
#include "edlab/transport.hpp"

namespace edlab {

namespace detail {

inline std::vector<long> horizons_of(const std::vector<double>& times) {
  std::vector<long> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(discrete_horizon(t));
  return out;
}

inline void require_series_times(const std::vector<double>& times) {
  if (times.empty()) throw DegenerateParameterError("series needs at least one time");
  if (times.front() < 0.0) throw DegenerateParameterError("series times must be nonnegative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw DegenerateParameterError("series times must be strictly increasing");
}

// a one-point series cannot be fitted: slope 0 by convention
inline void attach_fit(TimeSeries& s) {
  try {
    s.fit = fit_linear(s);
  } catch (const DegenerateTimesError&) {
    s.fit = LinearFit{0.0, s.values.front(), s.max_deviation_from_first()};
  }
}

}  // namespace detail

/// nu(log rho(., t_k)) on a time grid, with a least-squares line attached
/// when the grid allows one. Strategy follows the measure:
///
///  - atomic: one backward profile per support point
///  - density: one backward profile per quadrature node, weighted by the
///    measure's density
///  - empirical: evaluated on the stored orbit history; sample x_i at
///    horizon n reads its exact preimage orbit[i-n], so no inverse-map
///    arithmetic enters. Requires a map evolution and burn_in >= max
///    horizon.
inline TimeSeries log_density_series(const DensityEvolution& ev, const StationaryMeasure& nu,
                                     const std::vector<double>& times,
                                     const IntegratorConfig& cfg = {}) {
  detail::require_series_times(times);
  TimeSeries s;
  s.times = times;
  std::vector<CompensatedSum> acc(times.size());

  if (const auto* atomic = std::get_if<AtomicMeasure>(&nu)) {
    for (std::size_t i = 0; i < atomic->points.size(); ++i) {
      const std::vector<double> prof = log_density_profile(ev, atomic->points[i], times, cfg);
      for (std::size_t k = 0; k < prof.size(); ++k) acc[k].add(atomic->weights[i] * prof[k]);
    }
    for (auto& a : acc) s.values.push_back(a.value());
  } else if (const auto* ac = std::get_if<AbsContinuousMeasure>(&nu)) {
    for (std::size_t i = 0; i < ac->quad.size(); ++i) {
      const PhasePoint p = ac->quad.node(i);
      const double rho_bar = ac->density(p);
      const std::vector<double> prof = log_density_profile(ev, p, times, cfg);
      for (std::size_t k = 0; k < prof.size(); ++k) acc[k].add(rho_bar * prof[k]);
    }
    for (auto& a : acc) s.values.push_back(ac->quad.node_weight() * a.value());
  } else {
    const auto& emp = std::get<EmpiricalMeasure>(nu);
    if (ev.is_flow())
      throw DegenerateParameterError("empirical-history series needs a map evolution");
    const std::vector<long> horizons = detail::horizons_of(times);
    long max_h = 0;
    for (long h : horizons) max_h = std::max(max_h, h);
    if (static_cast<std::size_t>(max_h) > emp.burn_in)
      throw DegenerateParameterError(
          "empirical series horizon exceeds the stored burn-in history (" +
          std::to_string(max_h) + " > " + std::to_string(emp.burn_in) + ")");
    const auto& lj = ev.map().log_jac_inverse;
    for (std::size_t i = emp.burn_in; i < emp.orbit.size(); ++i) {
      double log_jac = 0.0;
      std::size_t next = 0;
      for (long j = 0; j <= max_h; ++j) {
        while (next < horizons.size() && horizons[next] == j) {
          acc[next].add(ev.log_rho0(emp.orbit[i - j]) + log_jac);
          ++next;
        }
        if (j < max_h) log_jac += lj(emp.orbit[i - j]);
      }
    }
    for (auto& a : acc) s.values.push_back(a.value() / static_cast<double>(emp.samples()));
  }

  detail::attach_fit(s);
  return s;
}

/// Growth rate of nu(log rho_t) predicted from the stationary measure
/// alone: K = -nu(div v).
inline double K_from_divergence(const StationaryMeasure& nu, const ContinuousSystem& sys) {
  return -expect(nu, [&](const PhasePoint& p) { return sys.divergence(p); });
}

/// Same prediction for a map: K = nu(log |det D(T^{-1})|), the mean
/// per-step log volume expansion of the inverse.
inline double K_from_log_jacobian(const StationaryMeasure& nu, const DiscreteSystem& sys) {
  return expect(nu, [&](const PhasePoint& p) { return sys.log_jac_inverse(p); });
}

/// dS/dt of the evolved ensemble, via the exact identity
/// dS/dt = mu_t(div v) with mu_t the pushforward of the initial measure.
inline double entropy_rate(const DensityEvolution& ev, double t, const QuadratureRule& quad,
                           const IntegratorConfig& cfg = {}) {
  if (!ev.is_flow()) throw DegenerateParameterError("entropy rate via divergence needs a flow");
  return pushforward_expectation(
      ev, [&](const PhasePoint& p) { return ev.flow().divergence(p); }, t, quad, cfg);
}

/// The invariant family B_p(t) = integral |rho(x,t)/rho_bar(x) - 1|^p
/// rho_bar(x) dx against a stationary density rho_bar. Constant in t when
/// rho_bar is genuinely stationary; the ratio is formed in log space.
inline TimeSeries bp_invariant(const DensityEvolution& ev, const AbsContinuousMeasure& stationary,
                               double p, const std::vector<double>& times,
                               const IntegratorConfig& cfg = {}) {
  if (!(p >= 1.0)) throw DegenerateParameterError("B_p needs p >= 1");
  detail::require_series_times(times);
  TimeSeries s;
  s.times = times;
  std::vector<CompensatedSum> acc(times.size());
  for (std::size_t i = 0; i < stationary.quad.size(); ++i) {
    const PhasePoint x = stationary.quad.node(i);
    const double rho_bar = stationary.density(x);
    if (!(rho_bar > 0.0)) throw NonpositiveDensityError(x, rho_bar);
    const double log_bar = std::log(rho_bar);
    const std::vector<double> prof = log_density_profile(ev, x, times, cfg);
    for (std::size_t k = 0; k < prof.size(); ++k) {
      const double ratio_minus_1 = std::expm1(prof[k] - log_bar);
      acc[k].add(std::pow(std::fabs(ratio_minus_1), p) * rho_bar);
    }
  }
  for (auto& a : acc) s.values.push_back(stationary.quad.node_weight() * a.value());
  detail::attach_fit(s);
  return s;
}

/// nu(f(rho_1(., t) / rho_2(., t))) for two densities evolving under one
/// system. The backward orbit is shared and the transport Jacobians
/// cancel identically in the ratio, so each value reduces to f of the
/// initial-density ratio at the common preimage; what remains tests that
/// nu really is invariant.
inline TimeSeries ratio_invariant(const DensityEvolution& ev1, const DensityEvolution& ev2,
                                  const StationaryMeasure& nu,
                                  const std::function<double(double)>& f,
                                  const std::vector<double>& times,
                                  const IntegratorConfig& cfg = {}) {
  detail::require_series_times(times);
  if (ev1.is_flow() != ev2.is_flow())
    throw DegenerateParameterError("density ratio needs both evolutions on the same system");
  {
    const std::string& n1 = ev1.is_flow() ? ev1.flow().name : ev1.map().name;
    const std::string& n2 = ev2.is_flow() ? ev2.flow().name : ev2.map().name;
    if (!n1.empty() && !n2.empty() && n1 != n2)
      throw DegenerateParameterError("density ratio needs both evolutions on the same system ('" +
                                     n1 + "' vs '" + n2 + "')");
  }

  // f(rho1/rho2) at one support point across all times, via one shared
  // backward sweep
  auto ratio_row = [&](const PhasePoint& x, std::vector<double>& row) {
    row.clear();
    if (ev1.is_flow()) {
      AugmentedOrbit orbit(ev1.flow(), x, -1, cfg);
      for (double t : times) {
        orbit.advance_to(t);
        const PhasePoint& pre = orbit.position();
        row.push_back(f(std::exp(ev1.log_rho0(pre) - ev2.log_rho0(pre))));
      }
    } else {
      BackwardMapWalker walk(ev1.map(), x);
      for (double t : times) {
        walk.advance_to(detail::discrete_horizon(t));
        const PhasePoint& pre = walk.position();
        row.push_back(f(std::exp(ev1.log_rho0(pre) - ev2.log_rho0(pre))));
      }
    }
  };

  TimeSeries s;
  s.times = times;
  std::vector<CompensatedSum> acc(times.size());
  std::vector<double> row;

  if (const auto* atomic = std::get_if<AtomicMeasure>(&nu)) {
    for (std::size_t i = 0; i < atomic->points.size(); ++i) {
      ratio_row(atomic->points[i], row);
      for (std::size_t k = 0; k < row.size(); ++k) acc[k].add(atomic->weights[i] * row[k]);
    }
    for (auto& a : acc) s.values.push_back(a.value());
  } else if (const auto* ac = std::get_if<AbsContinuousMeasure>(&nu)) {
    for (std::size_t i = 0; i < ac->quad.size(); ++i) {
      const PhasePoint x = ac->quad.node(i);
      const double rho_bar = ac->density(x);
      ratio_row(x, row);
      for (std::size_t k = 0; k < row.size(); ++k) acc[k].add(rho_bar * row[k]);
    }
    for (auto& a : acc) s.values.push_back(ac->quad.node_weight() * a.value());
  } else {
    const auto& emp = std::get<EmpiricalMeasure>(nu);
    if (ev1.is_flow())
      throw DegenerateParameterError("empirical-history ratio needs a map evolution");
    const std::vector<long> horizons = detail::horizons_of(times);
    long max_h = 0;
    for (long h : horizons) max_h = std::max(max_h, h);
    if (static_cast<std::size_t>(max_h) > emp.burn_in)
      throw DegenerateParameterError("empirical ratio horizon exceeds the stored burn-in history");
    for (std::size_t i = emp.burn_in; i < emp.orbit.size(); ++i) {
      for (std::size_t k = 0; k < horizons.size(); ++k) {
        const PhasePoint& pre = emp.orbit[i - horizons[k]];
        acc[k].add(f(std::exp(ev1.log_rho0(pre) - ev2.log_rho0(pre))));
      }
    }
    for (auto& a : acc) s.values.push_back(a.value() / static_cast<double>(emp.samples()));
  }

  detail::attach_fit(s);
  return s;
}

/// (K+, K-) for the circle flow: the growth-rate prediction evaluated on
/// the forward attractor's measure and on the backward (time-reversed)
/// attractor's. A genuine reversal forces K+ = -K-. For |omega| > 1 the
/// two flows share the unique smooth stationary density and both entries
/// are its (zero) rate. |omega| = 1 is marginal: refused unless the
/// caller opts into the degenerate (0, 0) answer.
inline std::pair<double, double> reversibility_K_pair(double omega, bool allow_marginal = false,
                                                      std::size_t quad_nodes = 4096) {
  if (std::fabs(omega) == 1.0) {
    if (allow_marginal) return {0.0, 0.0};
    throw DegenerateParameterError(
        "|omega| = 1 has only a marginal fixed point; pass allow_marginal for the (0, 0) limit");
  }
  const ContinuousSystem sys = make_circle_flow(omega);
  const QuadratureRule quad = QuadratureRule::circle_midpoint(quad_nodes);
  if (std::fabs(omega) > 1.0) {
    const double k = K_from_divergence(circle_stationary(omega, quad), sys);
    return {k, k};
  }
  const double k_fwd = K_from_divergence(circle_stationary(omega, quad, false), sys);
  const double k_bwd = K_from_divergence(circle_stationary(omega, quad, true), sys);
  return {k_fwd, k_bwd};
}

}  // namespace edlab
