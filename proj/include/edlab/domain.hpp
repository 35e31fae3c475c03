#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string_view>

namespace edlab {

/// Phase-space domains supported by the lab. Both are boundaryless:
/// the circle is [-pi, pi) with wraparound, the unit square is [0,1)^2
/// with per-axis wrap.
enum class Domain { circle, unit_square };

constexpr int domain_dimension(Domain d) { return d == Domain::circle ? 1 : 2; }

inline double domain_volume(Domain d) {
  return d == Domain::circle ? 2.0 * std::numbers::pi : 1.0;
}

constexpr std::string_view domain_name(Domain d) {
  return d == Domain::circle ? "circle" : "unit-square";
}

/// Wrap an angle into [-pi, pi).
inline double wrap_angle(double x) {
  constexpr double pi = std::numbers::pi;
  constexpr double two_pi = 2.0 * pi;
  double y = x - two_pi * std::floor((x + pi) / two_pi);
  // rounding in floor can leave y a hair outside the half-open interval
  if (y >= pi) y -= two_pi;
  if (y < -pi) y += two_pi;
  return y;
}

/// Wrap a coordinate into [0, 1).
inline double wrap_unit(double u) {
  double y = u - std::floor(u);
  if (y >= 1.0) y -= 1.0;
  if (y < 0.0) y += 1.0;
  return y;
}

/// A state-space point tagged with the domain that owns it.
/// Coordinates beyond the domain dimension stay zero.
struct PhasePoint {
  Domain domain = Domain::circle;
  std::array<double, 2> coords{0.0, 0.0};

  int dimension() const { return domain_dimension(domain); }
  double& operator[](std::size_t i) { return coords[i]; }
  double operator[](std::size_t i) const { return coords[i]; }
};

/// Re-apply the owning domain's wrap to every coordinate.
inline PhasePoint wrap(const PhasePoint& p) {
  PhasePoint q = p;
  if (p.domain == Domain::circle) {
    q.coords[0] = wrap_angle(p.coords[0]);
  } else {
    q.coords[0] = wrap_unit(p.coords[0]);
    q.coords[1] = wrap_unit(p.coords[1]);
  }
  return q;
}

inline PhasePoint circle_point(double x) {
  return PhasePoint{Domain::circle, {wrap_angle(x), 0.0}};
}

inline PhasePoint square_point(double x, double y) {
  return PhasePoint{Domain::unit_square, {wrap_unit(x), wrap_unit(y)}};
}

/// Distance between two reals on a period-`period` circle.
inline double periodic_gap(double a, double b, double period) {
  double d = std::fabs(a - b);
  d -= period * std::floor(d / period);
  if (d < 0.0) d += period;
  return std::min(d, period - d);
}

/// Geodesic distance respecting the wrap. Points must share a domain.
inline double domain_distance(const PhasePoint& a, const PhasePoint& b) {
  if (a.domain == Domain::circle) {
    return periodic_gap(a[0], b[0], 2.0 * std::numbers::pi);
  }
  const double dx = periodic_gap(a[0], b[0], 1.0);
  const double dy = periodic_gap(a[1], b[1], 1.0);
  return std::hypot(dx, dy);
}

}  // namespace edlab
