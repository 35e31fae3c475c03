#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "edlab/domain.hpp"
#include "edlab/errors.hpp"
#include "edlab/rng.hpp"
#include "edlab/summation.hpp"

namespace edlab {

/// Equal-weight quadrature node set over a domain. Grid rules are stored
/// as descriptors and generate nodes on demand, so a depth-12 dyadic grid
/// (16.8M nodes) costs nothing to hold. Three kinds:
///
///  - circle midpoint: N uniform midpoints of [-pi, pi); spectrally
///    accurate for smooth periodic integrands
///  - square dyadic midpoint: the 4^depth cell centers of the uniform
///    dyadic partition; centers are exact binary rationals, which keeps
///    piecewise-dyadic maps exact on the node set
///  - monte carlo: seeded uniform draws, fully deterministic; the tool of
///    choice when a map iterated far beyond the grid depth would alias on
///    lattice nodes
class QuadratureRule {
 public:
  static QuadratureRule circle_midpoint(std::size_t n) {
    if (n < 1) throw DegenerateParameterError("circle midpoint rule needs n >= 1");
    QuadratureRule r;
    r.kind_ = Kind::circle_midpoint;
    r.domain_ = Domain::circle;
    r.size_ = n;
    r.weight_ = 2.0 * std::numbers::pi / static_cast<double>(n);
    return r;
  }

  static QuadratureRule square_dyadic_midpoint(int depth) {
    if (depth < 0 || depth > 14)
      throw DegenerateParameterError("dyadic midpoint depth must be in [0, 14]");
    QuadratureRule r;
    r.kind_ = Kind::square_dyadic;
    r.domain_ = Domain::unit_square;
    r.depth_ = depth;
    r.size_ = std::size_t{1} << (2 * depth);
    r.weight_ = std::ldexp(1.0, -2 * depth);
    return r;
  }

  static QuadratureRule monte_carlo(Domain d, std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw DegenerateParameterError("monte carlo rule needs samples >= 1");
    QuadratureRule r;
    r.kind_ = Kind::monte_carlo;
    r.domain_ = d;
    r.size_ = samples;
    r.weight_ = domain_volume(d) / static_cast<double>(samples);
    r.seed_ = seed;
    r.nodes_.reserve(samples);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < samples; ++i) r.nodes_.push_back(uniform_point(d, rng));
    return r;
  }

  std::size_t size() const { return size_; }
  Domain domain() const { return domain_; }

  /// All nodes carry the same weight: cell volume (grids) or
  /// domain volume / samples (monte carlo).
  double weight(std::size_t) const { return weight_; }
  double node_weight() const { return weight_; }

  PhasePoint node(std::size_t i) const {
    switch (kind_) {
      case Kind::circle_midpoint: {
        const double step = 2.0 * std::numbers::pi / static_cast<double>(size_);
        const double x = -std::numbers::pi + (static_cast<double>(i) + 0.5) * step;
        return PhasePoint{Domain::circle, {x, 0.0}};
      }
      case Kind::square_dyadic: {
        // cell center (2k+1) / 2^(depth+1), an exact binary rational
        const std::size_t per_axis = std::size_t{1} << depth_;
        const std::size_t ix = i >> depth_;
        const std::size_t iy = i & (per_axis - 1);
        const double x = std::ldexp(static_cast<double>(2 * ix + 1), -(depth_ + 1));
        const double y = std::ldexp(static_cast<double>(2 * iy + 1), -(depth_ + 1));
        return PhasePoint{Domain::unit_square, {x, y}};
      }
      case Kind::monte_carlo:
        return nodes_[i];
    }
    return {};
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::circle_midpoint:
        return "circle-midpoint{" + std::to_string(size_) + "}";
      case Kind::square_dyadic:
        return "square-dyadic{depth=" + std::to_string(depth_) + "}";
      case Kind::monte_carlo:
        return "monte-carlo{" + std::to_string(size_) + ",seed=" + std::to_string(seed_) + "}";
    }
    return {};
  }

  int dyadic_depth() const { return depth_; }

  /// Integral of f over the domain: compensated sum of node values times
  /// the shared weight. The factorized form rounds once per term less and
  /// is what makes deep-grid sums hold to a few ulp.
  template <class F>
  double integrate(F&& f) const {
    CompensatedSum acc;
    for (std::size_t i = 0; i < size_; ++i) acc.add(f(node(i)));
    return weight_ * acc.value();
  }

 private:
  enum class Kind { circle_midpoint, square_dyadic, monte_carlo };

  QuadratureRule() = default;

  Kind kind_ = Kind::circle_midpoint;
  Domain domain_ = Domain::circle;
  std::size_t size_ = 0;
  double weight_ = 0.0;
  int depth_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<PhasePoint> nodes_;  // monte carlo only
};

}  // namespace edlab
