#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "edlab/dynsys.hpp"
#include "edlab/errors.hpp"
#include "edlab/quadrature.hpp"
#include "edlab/summation.hpp"

namespace edlab {

/// A density sample. `underflowed` marks values whose true magnitude is
/// below the smallest positive double, returned as exactly 0; the
/// log-space entry points never lose them.
struct DensityValue {
  double value = 0.0;
  bool underflowed = false;
};

/// An initial probability density transported by an invertible system.
/// Both forms of the density are carried: rho0 for Lagrangian-form
/// expectations and log_rho0 for transport arithmetic, each supplied as a
/// direct formula (no exp/log round trips). Internal computations stay in
/// log space; exp happens only at the outermost calls.
struct DensityEvolution {
  AnySystem system;
  std::function<double(const PhasePoint&)> rho0;
  std::function<double(const PhasePoint&)> log_rho0;
  std::string density_name;

  bool is_flow() const { return std::holds_alternative<ContinuousSystem>(system); }
  const ContinuousSystem& flow() const { return std::get<ContinuousSystem>(system); }
  const DiscreteSystem& map() const { return std::get<DiscreteSystem>(system); }
  Domain domain() const {
    return is_flow() ? flow().domain : map().domain;
  }
};

/// Wrap a raw density in a positivity check and take its log. For ad-hoc
/// densities without a nicer analytic log; the named families supply
/// log1p-based forms instead.
inline std::function<double(const PhasePoint&)> make_log_density(
    std::function<double(const PhasePoint&)> raw) {
  return [raw = std::move(raw)](const PhasePoint& p) {
    const double v = raw(p);
    if (!(v > 0.0)) throw NonpositiveDensityError(p, v);
    return std::log(v);
  };
}

inline DensityEvolution density_evolution(AnySystem sys,
                                          std::function<double(const PhasePoint&)> rho0,
                                          std::function<double(const PhasePoint&)> log_rho0,
                                          std::string density_name = {}) {
  DensityEvolution ev;
  ev.system = std::move(sys);
  ev.rho0 = std::move(rho0);
  ev.log_rho0 = std::move(log_rho0);
  ev.density_name = std::move(density_name);
  return ev;
}

/// Convenience constructor deriving the log form when no analytic log is
/// worth writing.
inline DensityEvolution density_evolution(AnySystem sys,
                                          std::function<double(const PhasePoint&)> rho0,
                                          std::string density_name = {}) {
  auto log_form = make_log_density(rho0);
  return density_evolution(std::move(sys), std::move(rho0), std::move(log_form),
                           std::move(density_name));
}

namespace detail {

/// Map-time arguments must be integers (within round-off slop) >= 0.
inline long discrete_horizon(double t) {
  const double r = std::round(t);
  if (t < 0.0 || std::fabs(t - r) > 1e-9)
    throw DegenerateParameterError("map evolution time must be a nonnegative integer, got " +
                                   std::to_string(t));
  return static_cast<long>(r);
}

inline void require_profile_times(const std::vector<double>& times) {
  if (times.empty()) throw DegenerateParameterError("profile needs at least one time");
  if (times.front() < 0.0)
    throw DegenerateParameterError("profile times must be nonnegative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1])
      throw DegenerateParameterError("profile times must be nondecreasing");
}

}  // namespace detail

/// log rho(x, t) via the exact pushforward identity: pull x back along
/// the orbit and add the log-Jacobian of the backward motion. Flows
/// accept signed t (negative t pulls forward); maps take integer t >= 0.
inline double log_density_at(const DensityEvolution& ev, const PhasePoint& x, double t,
                             const IntegratorConfig& cfg = {}) {
  if (ev.is_flow()) {
    if (t == 0.0) return ev.log_rho0(wrap(x));
    AugmentedOrbit orbit(ev.flow(), x, t > 0.0 ? -1 : +1, cfg);
    orbit.advance_to(std::fabs(t));
    const double log_jac = (t > 0.0 ? -1.0 : 1.0) * orbit.divergence_integral();
    return ev.log_rho0(orbit.position()) + log_jac;
  }
  const auto [pre, log_jac] = map_backward_orbit(ev.map(), x, detail::discrete_horizon(t));
  return ev.log_rho0(pre) + log_jac;
}

/// rho(x, t) itself. A positive value that rounds to zero in the exp is
/// returned as 0 with the underflow flag set.
inline DensityValue density_at(const DensityEvolution& ev, const PhasePoint& x, double t,
                               const IntegratorConfig& cfg = {}) {
  const double lr = log_density_at(ev, x, t, cfg);
  DensityValue out;
  out.value = std::exp(lr);
  out.underflowed = (out.value == 0.0) && std::isfinite(lr);
  return out;
}

/// log rho(x, t_k) for a nondecreasing grid of times, from one backward
/// sweep: the orbit (and for maps, the inverse walk) is continued
/// incrementally instead of being recomputed per time.
inline std::vector<double> log_density_profile(const DensityEvolution& ev, const PhasePoint& x,
                                               const std::vector<double>& times,
                                               const IntegratorConfig& cfg = {}) {
  detail::require_profile_times(times);
  std::vector<double> out;
  out.reserve(times.size());
  if (ev.is_flow()) {
    AugmentedOrbit orbit(ev.flow(), x, -1, cfg);
    for (double t : times) {
      orbit.advance_to(t);
      out.push_back(ev.log_rho0(orbit.position()) - orbit.divergence_integral());
    }
  } else {
    BackwardMapWalker walk(ev.map(), x);
    for (double t : times) {
      walk.advance_to(detail::discrete_horizon(t));
      out.push_back(ev.log_rho0(walk.position()) + walk.log_jacobian());
    }
  }
  return out;
}

/// Expectation of f under the evolved density, computed on the initial
/// slice: integral f(T_t x) rho0(x) dx. No backward orbits involved, so
/// it works for maps off their image and for signed flow times.
template <class F>
double pushforward_expectation(const DensityEvolution& ev, F&& f, double t,
                               const QuadratureRule& quad, const IntegratorConfig& cfg = {}) {
  if (ev.is_flow()) {
    return quad.integrate([&](const PhasePoint& p) {
      return f(advance(ev.flow(), p, t, cfg)) * ev.rho0(p);
    });
  }
  const long n = detail::discrete_horizon(t);
  return quad.integrate([&](const PhasePoint& p) {
    PhasePoint z = p;
    for (long k = 0; k < n; ++k) z = wrap(ev.map().forward(z));
    return f(z) * ev.rho0(p);
  });
}

/// Gibbs entropy S(t) = -integral rho log rho, evaluated in Lagrangian
/// form on the initial slice:
///
///   S(t) = -integral rho0(x) [log rho0(x) - Lambda(x,t)] dx,
///   Lambda(x,t) = integral_0^t div v(T_s x) ds.
///
/// One forward orbit per node; flows only.
inline double lagrangian_gibbs_entropy(const DensityEvolution& ev, double t,
                                       const QuadratureRule& quad,
                                       const IntegratorConfig& cfg = {}) {
  if (!ev.is_flow())
    throw DegenerateParameterError("Lagrangian entropy needs a flow; use the grid form for maps");
  return quad.integrate([&](const PhasePoint& p) {
    const auto [end, lambda] = forward_orbit_with_divergence_integral(ev.flow(), p, t, cfg);
    (void)end;
    return -ev.rho0(p) * (ev.log_rho0(p) - lambda);
  });
}

/// Lagrangian entropy on a nondecreasing grid of times >= 0, one forward
/// sweep per node.
inline std::vector<double> lagrangian_gibbs_entropy_series(const DensityEvolution& ev,
                                                           const std::vector<double>& times,
                                                           const QuadratureRule& quad,
                                                           const IntegratorConfig& cfg = {}) {
  if (!ev.is_flow())
    throw DegenerateParameterError("Lagrangian entropy needs a flow; use the grid form for maps");
  detail::require_profile_times(times);
  std::vector<CompensatedSum> acc(times.size());
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const PhasePoint p = quad.node(i);
    const double lr0 = ev.log_rho0(p);
    const double rho0 = ev.rho0(p);
    AugmentedOrbit orbit(ev.flow(), p, +1, cfg);
    for (std::size_t k = 0; k < times.size(); ++k) {
      orbit.advance_to(times[k]);
      acc[k].add(-rho0 * (lr0 - orbit.divergence_integral()));
    }
  }
  std::vector<double> out;
  out.reserve(times.size());
  for (auto& a : acc) out.push_back(quad.node_weight() * a.value());
  return out;
}

/// Gibbs entropy in Eulerian (grid) form: -sum w rho(y, t) log rho(y, t)
/// over the rule's nodes, with rho evaluated exactly by backward
/// transport. The natural form for maps; underflowed cells contribute 0,
/// the correct limit of rho log rho.
inline std::vector<double> grid_gibbs_entropy_series(const DensityEvolution& ev,
                                                     const std::vector<double>& times,
                                                     const QuadratureRule& quad,
                                                     const IntegratorConfig& cfg = {}) {
  detail::require_profile_times(times);
  std::vector<CompensatedSum> acc(times.size());
  std::vector<double> profile;
  for (std::size_t i = 0; i < quad.size(); ++i) {
    profile = log_density_profile(ev, quad.node(i), times, cfg);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double lr = profile[k];
      const double rho = std::exp(lr);
      acc[k].add(rho == 0.0 ? 0.0 : -rho * lr);
    }
  }
  std::vector<double> out;
  out.reserve(times.size());
  for (auto& a : acc) out.push_back(quad.node_weight() * a.value());
  return out;
}

inline double grid_gibbs_entropy(const DensityEvolution& ev, double t, const QuadratureRule& quad,
                                 const IntegratorConfig& cfg = {}) {
  return grid_gibbs_entropy_series(ev, {t}, quad, cfg).front();
}

}  // namespace edlab
