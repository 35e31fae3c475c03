#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>

#include "edlab/domain.hpp"
#include "edlab/errors.hpp"

namespace edlab {

using Velocity = std::array<double, 2>;

/// Continuous-time dynamics: a smooth vector field on a wrapped domain,
/// its divergence, and an optional time-reversal involution R with
/// R T_t = T_{-t} R. Field callbacks must accept coordinates slightly
/// outside the fundamental domain (integrator stages run unwrapped), so
/// supply them as periodic extensions.
struct ContinuousSystem {
  Domain domain = Domain::circle;
  std::function<Velocity(const PhasePoint&)> vector_field;
  std::function<double(const PhasePoint&)> divergence;
  std::function<PhasePoint(const PhasePoint&)> reversal;  // empty when absent
  std::string name;

  int dimension() const { return domain_dimension(domain); }
  bool has_reversal() const { return static_cast<bool>(reversal); }
};

/// Discrete-time invertible dynamics. The inverse may be partial: it
/// returns nullopt off the image of the forward map (dissipative maps do
/// not fill their domain). log_jac_inverse is log |det D(T^{-1})| at a
/// point where the inverse is defined.
struct DiscreteSystem {
  Domain domain = Domain::unit_square;
  std::function<PhasePoint(const PhasePoint&)> forward;
  std::function<std::optional<PhasePoint>(const PhasePoint&)> inverse;
  std::function<double(const PhasePoint&)> log_jac_inverse;
  /// Optional forward step for long sampled orbits. An expanding map
  /// sheds one mantissa bit of the stretched coordinate per step, so a
  /// plain double-precision orbit degenerates within ~60 steps (the
  /// doubling map lands exactly on its fixed point). This variant
  /// refreshes the lost low bit from the caller's generator, which
  /// reproduces the orbit statistics of an ideal random initial point;
  /// it must stay within one unit in the last place of `forward`.
  std::function<PhasePoint(const PhasePoint&, std::mt19937_64&)> resampled_forward;
  std::string name;

  int dimension() const { return domain_dimension(domain); }
};

/// Either kind of dynamics, for machinery that handles both.
using AnySystem = std::variant<ContinuousSystem, DiscreteSystem>;

/// Fixed-step integrator knobs shared by every orbit computation.
struct IntegratorConfig {
  double step = 1e-3;             // target RK4 step in time units
  long max_substeps = 20000000;   // cap on substeps per advance segment
  double fixed_point_tol = 1e-14; // |v(x)| below this treats x as stationary
};

/// An orbit of the augmented system (position, divergence integral),
/// continued incrementally in one time direction. With direction = +1 it
/// tracks y(s) = T_s x; with -1 it tracks y(s) = T_{-s} x. Either way
///
///   divergence_integral(s) = integral_0^s div v(y(u)) du
///
/// accumulated as an extra RK4 state variable on the same grid, so the
/// exponent converges at the same fourth order as the position.
///
/// Starting points with |v| below the fixed-point tolerance short-circuit:
/// the position is held exactly and the integral is s * div v(x), which
/// keeps stationary-point series linear to the last bit.
class AugmentedOrbit {
 public:
  AugmentedOrbit(const ContinuousSystem& sys, const PhasePoint& start, int direction,
                 const IntegratorConfig& cfg = {})
      : sys_(&sys), cfg_(cfg), dir_(direction), y_(wrap(start)) {
    const Velocity v = sys.vector_field(y_);
    const double speed = std::hypot(v[0], v[1]);
    stationary_ = speed < cfg.fixed_point_tol;
    if (stationary_) local_div_ = sys.divergence(y_);
  }

  /// Continue the orbit to parameter s >= time(). The segment is covered
  /// by uniform substeps no longer than cfg.step (capped at max_substeps).
  void advance_to(double s) {
    if (s < t_) throw DegenerateParameterError("orbit cannot be continued backward in its parameter");
    if (stationary_) {
      t_ = s;
      lambda_ = s * local_div_;
      return;
    }
    const double span = s - t_;
    if (span == 0.0) return;
    long n = static_cast<long>(std::ceil(span / cfg_.step));
    if (n < 1) n = 1;
    if (n > cfg_.max_substeps) n = cfg_.max_substeps;
    const double h = span / static_cast<double>(n);
    for (long i = 0; i < n; ++i) step(h);
    t_ = s;
  }

  double time() const { return t_; }
  const PhasePoint& position() const { return y_; }
  double divergence_integral() const { return lambda_; }

 private:
  struct Rhs {
    double dy0, dy1, dlam;
  };

  Rhs rhs(double y0, double y1) const {
    PhasePoint p{sys_->domain, {y0, y1}};
    const Velocity v = sys_->vector_field(p);
    const double d = sys_->divergence(p);
    const double s = static_cast<double>(dir_);
    return {s * v[0], s * v[1], d};
  }

  void step(double h) {
    // classical RK4; stage arithmetic stays unwrapped, the wrap is applied
    // once to the completed step output
    const double y0 = y_[0], y1 = y_[1];
    const Rhs k1 = rhs(y0, y1);
    const Rhs k2 = rhs(y0 + 0.5 * h * k1.dy0, y1 + 0.5 * h * k1.dy1);
    const Rhs k3 = rhs(y0 + 0.5 * h * k2.dy0, y1 + 0.5 * h * k2.dy1);
    const Rhs k4 = rhs(y0 + h * k3.dy0, y1 + h * k3.dy1);
    PhasePoint next{sys_->domain,
                    {y0 + h / 6.0 * (k1.dy0 + 2.0 * k2.dy0 + 2.0 * k3.dy0 + k4.dy0),
                     y1 + h / 6.0 * (k1.dy1 + 2.0 * k2.dy1 + 2.0 * k3.dy1 + k4.dy1)}};
    lambda_ += h / 6.0 * (k1.dlam + 2.0 * k2.dlam + 2.0 * k3.dlam + k4.dlam);
    y_ = wrap(next);
    if (!std::isfinite(y_[0]) || !std::isfinite(y_[1]) || !std::isfinite(lambda_)) {
      throw NumericalOverflowError("orbit of '" + sys_->name + "' left the finite range near parameter " +
                                   std::to_string(t_));
    }
  }

  const ContinuousSystem* sys_;
  IntegratorConfig cfg_;
  int dir_;
  PhasePoint y_;
  double t_ = 0.0;
  double lambda_ = 0.0;
  bool stationary_ = false;
  double local_div_ = 0.0;
};

/// T_t x by fixed-step RK4. Negative t integrates the reversed field;
/// t = 0 returns x (wrapped) untouched.
inline PhasePoint advance(const ContinuousSystem& sys, const PhasePoint& x, double t,
                          const IntegratorConfig& cfg = {}) {
  if (t == 0.0) return wrap(x);
  AugmentedOrbit orbit(sys, x, t > 0.0 ? +1 : -1, cfg);
  orbit.advance_to(std::fabs(t));
  return orbit.position();
}

/// (T_{-t} x, log J(x,t)) for t >= 0, where J is the volume derivative of
/// T_{-t} at x: log J(x,t) = -integral_0^t div v(T_{-s} x) ds.
inline std::pair<PhasePoint, double> backward_orbit_with_log_jacobian(
    const ContinuousSystem& sys, const PhasePoint& x, double t, const IntegratorConfig& cfg = {}) {
  if (t < 0.0) throw DegenerateParameterError("backward orbit needs t >= 0");
  AugmentedOrbit orbit(sys, x, -1, cfg);
  orbit.advance_to(t);
  return {orbit.position(), -orbit.divergence_integral()};
}

/// (T_t x, integral_0^t div v(T_s x) ds) for signed t; the integral is
/// oriented, so negative t gives minus the integral along the backward
/// orbit. This is the volume-expansion exponent of the forward flow.
inline std::pair<PhasePoint, double> forward_orbit_with_divergence_integral(
    const ContinuousSystem& sys, const PhasePoint& x, double t, const IntegratorConfig& cfg = {}) {
  if (t == 0.0) return {wrap(x), 0.0};
  const int dir = t > 0.0 ? +1 : -1;
  AugmentedOrbit orbit(sys, x, dir, cfg);
  orbit.advance_to(std::fabs(t));
  return {orbit.position(), static_cast<double>(dir) * orbit.divergence_integral()};
}

/// The n-fold inverse of a discrete system, continued one step at a time,
/// with the running log-Jacobian of the composite inverse:
///
///   log J(x,n) = sum_{k=0}^{n-1} log_jac_inverse(T^{-k} x).
///
/// Walking off the image throws PreimageUndefinedError with the step index.
class BackwardMapWalker {
 public:
  BackwardMapWalker(const DiscreteSystem& sys, const PhasePoint& start)
      : sys_(&sys), cur_(wrap(start)) {}

  void advance_to(long n) {
    if (n < n_) throw DegenerateParameterError("map walker cannot be continued backward");
    while (n_ < n) {
      log_jac_ += sys_->log_jac_inverse(cur_);
      std::optional<PhasePoint> prev = sys_->inverse(cur_);
      if (!prev) throw PreimageUndefinedError(n_, cur_);
      cur_ = wrap(*prev);
      ++n_;
    }
  }

  long steps() const { return n_; }
  const PhasePoint& position() const { return cur_; }
  double log_jacobian() const { return log_jac_; }

 private:
  const DiscreteSystem* sys_;
  PhasePoint cur_;
  long n_ = 0;
  double log_jac_ = 0.0;
};

/// (T^{-n} x, log J(x,n)) for n >= 0.
inline std::pair<PhasePoint, double> map_backward_orbit(const DiscreteSystem& sys,
                                                        const PhasePoint& x, long n) {
  if (n < 0) throw DegenerateParameterError("map backward orbit needs n >= 0");
  BackwardMapWalker walk(sys, x);
  walk.advance_to(n);
  return {walk.position(), walk.log_jacobian()};
}

/// Residual of the reversal identity: |R(T_t x) - T_{-t}(R x)| in the
/// domain metric. Zero (up to integrator arithmetic) for a genuine
/// time-reversal involution.
inline double check_reversal(const ContinuousSystem& sys, const PhasePoint& x, double t,
                             const IntegratorConfig& cfg = {}) {
  if (!sys.has_reversal())
    throw MissingReversalError("system '" + sys.name + "' declares no reversal involution");
  const PhasePoint lhs = wrap(sys.reversal(advance(sys, x, t, cfg)));
  const PhasePoint rhs = advance(sys, wrap(sys.reversal(wrap(x))), -t, cfg);
  return domain_distance(lhs, rhs);
}

}  // namespace edlab
