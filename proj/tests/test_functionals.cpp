#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "edlab/catalog.hpp"
#include "edlab/functionals.hpp"
#include "oracles.hpp"

using namespace edlab;

namespace {

DensityEvolution uniform_circle(double omega) {
  const double log_c = -std::log(2.0 * oracle::pi);
  return density_evolution(
      make_circle_flow(omega), [log_c](const PhasePoint&) { return std::exp(log_c); },
      [log_c](const PhasePoint&) { return log_c; }, "uniform");
}

DensityEvolution bump_circle(double omega, double eps) {
  return density_evolution(
      make_circle_flow(omega),
      [eps](const PhasePoint& p) { return (1.0 + eps * std::cos(p[0])) / (2.0 * oracle::pi); },
      "cosine-bump");
}

AbsContinuousMeasure circulating_density(double omega, std::size_t nodes) {
  return normalize_density(
      [omega](const PhasePoint& p) { return 1.0 / std::fabs(omega - std::sin(p[0])); },
      QuadratureRule::circle_midpoint(nodes));
}

// The omega = 2 stationary density tilted by (1 + eps sin x). All the
// constants are in closed form: the base normalization is 2 pi / sqrt(3)
// and the tilt's mean under the stationary density is 2 - sqrt(3).
DensityEvolution perturbed_circulating(double eps) {
  const double log_norm =
      std::log(2.0 * oracle::pi / std::sqrt(3.0)) + std::log1p(eps * (2.0 - std::sqrt(3.0)));
  return density_evolution(
      make_circle_flow(2.0),
      [eps, log_norm](const PhasePoint& p) {
        return std::exp(std::log1p(eps * std::sin(p[0])) - std::log(2.0 - std::sin(p[0])) -
                        log_norm);
      },
      [eps, log_norm](const PhasePoint& p) {
        return std::log1p(eps * std::sin(p[0])) - std::log(2.0 - std::sin(p[0])) - log_norm;
      },
      "stationary-perturbed");
}

}  // namespace

TEST_CASE("log-density growth at a point attractor is exactly linear") {
  const DensityEvolution ev = uniform_circle(0.5);
  const StationaryMeasure nu = dirac(circle_point(std::asin(0.5)));

  TimeSeries s = log_density_series(ev, nu, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
  REQUIRE(s.fit.has_value());
  // The stationary short-circuit makes the series linear to round-off,
  // with slope sqrt(1 - omega^2).
  CHECK(s.fit->slope == Catch::Approx(circle_K_closed_form(0.5)).margin(1e-12));
  CHECK(s.fit->max_abs_residual < 1e-12);
  CHECK(s.values.front() == Catch::Approx(-std::log(2.0 * oracle::pi)).margin(1e-14));

  // A different fit window sees the same slope.
  const TimeSeries late = log_density_series(ev, nu, {2.0, 4.0, 6.0, 8.0});
  CHECK(late.fit->slope == Catch::Approx(s.fit->slope).margin(1e-10));

  // The slope is a property of the measure, not the density: weighting
  // attractor and repeller equally cancels the growth entirely.
  const StationaryMeasure mix = atomic_measure(
      {circle_point(std::asin(0.5)), circle_point(oracle::pi - std::asin(0.5))}, {0.5, 0.5});
  const TimeSeries flat = log_density_series(ev, mix, {0.0, 1.0, 2.0, 3.0});
  CHECK(std::fabs(flat.fit->slope) < 1e-12);
}

TEST_CASE("divergence functional predicts the fitted slope") {
  for (double omega : {0.0, 0.5, 0.9}) {
    const ContinuousSystem sys = make_circle_flow(omega);
    const StationaryMeasure nu = dirac(circle_point(std::asin(omega)));
    CHECK(K_from_divergence(nu, sys) ==
          Catch::Approx(circle_K_closed_form(omega)).margin(1e-12));
  }

  // Circulating regime: the smooth stationary measure gives rate zero.
  const ContinuousSystem fast = make_circle_flow(1.001);
  const StationaryMeasure bar = circulating_density(1.001, 4096);
  CHECK(std::fabs(K_from_divergence(bar, fast)) < 1e-10);
  CHECK(circle_K_closed_form(1.001) == 0.0);
}

TEST_CASE("map growth rate is the mean inverse Jacobian") {
  const DiscreteSystem sys = make_baker(0.25);
  const StationaryMeasure emp = birkhoff_empirical(sys, std::nullopt, 100, 1000, 4);
  CHECK(K_from_log_jacobian(emp, sys) == Catch::Approx(std::log(2.0)).margin(1e-14));

  const DiscreteSystem half = make_baker(0.5);
  const StationaryMeasure leb =
      AbsContinuousMeasure([](const PhasePoint&) { return 1.0; },
                           QuadratureRule::square_dyadic_midpoint(4));
  CHECK(K_from_log_jacobian(leb, half) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("log-density means under the smooth stationary measure stay constant") {
  const DensityEvolution ev = bump_circle(2.0, 0.5);
  const StationaryMeasure bar = circulating_density(2.0, 512);

  const TimeSeries s = log_density_series(ev, bar, {0.0, 1.0, 2.0, 3.0});
  CHECK(s.max_deviation_from_first() < 1e-10);
  CHECK(std::fabs(s.fit->slope) < 1e-10);
}

TEST_CASE("empirical log-density series on the dissipative attractor") {
  const DiscreteSystem sys = make_baker(0.25);
  const DensityEvolution ev = density_evolution(
      AnySystem{sys}, [](const PhasePoint&) { return 1.0; },
      [](const PhasePoint&) { return 0.0; }, "uniform");
  const StationaryMeasure emp = birkhoff_empirical(sys, std::nullopt, 20, 2000, 8);

  // With a uniform start the per-sample value is exactly n log 2, so the
  // series is linear to the last bit whatever the orbit does.
  const TimeSeries s =
      log_density_series(ev, emp, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0});
  CHECK(s.fit->slope == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(s.fit->max_abs_residual < 1e-12);
  CHECK(s.values[3] == Catch::Approx(3.0 * std::log(2.0)).margin(1e-13));

  // Horizons must fit inside the recorded burn-in history.
  CHECK_THROWS_AS(log_density_series(ev, emp, {0.0, 21.0}), DegenerateParameterError);
  // Map horizons must be integers.
  CHECK_THROWS_AS(log_density_series(ev, emp, {0.0, 1.5}), DegenerateParameterError);
  // Orbit histories only make sense against a map evolution.
  CHECK_THROWS_AS(log_density_series(uniform_circle(0.5), emp, {0.0, 1.0}),
                  DegenerateParameterError);
}

TEST_CASE("moment invariants of the density ratio stay constant") {
  const double omega = 2.0;
  const AbsContinuousMeasure bar = circulating_density(omega, 2048);
  const DensityEvolution ev = perturbed_circulating(0.5);
  const std::vector<double> times = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};

  const TimeSeries b2 = bp_invariant(ev, bar, 2.0, times);
  const double base2 = b2.values.front();
  CHECK(base2 > 0.0);
  // Frozen reference computed with an independent high-resolution rule.
  CHECK(base2 == Catch::Approx(0.09022906098203716).margin(1e-9));
  for (double v : b2.values) CHECK(std::fabs(v - base2) / base2 < 1e-4);

  const TimeSeries b1 = bp_invariant(ev, bar, 1.0, times);
  const double base1 = b1.values.front();
  for (double v : b1.values) {
    CHECK(std::fabs(v - base1) / base1 < 1e-4);
    CHECK(v >= 0.5 * base1);
  }

  CHECK_THROWS_AS(bp_invariant(ev, bar, 0.5, times), DegenerateParameterError);
}

TEST_CASE("observed density ratios reduce to the initial ratio at the preimage") {
  const DensityEvolution ev1 = bump_circle(0.5, 0.9);
  const DensityEvolution ev2 = uniform_circle(0.5);
  const StationaryMeasure nu = dirac(circle_point(std::asin(0.5)));
  const std::vector<double> times = {0.0, 2.0, 5.0, 10.0};

  const auto identity = [](double r) { return r; };
  const TimeSeries plain = ratio_invariant(ev1, ev2, nu, identity, times);
  CHECK(plain.max_deviation_from_first() < 1e-10);
  CHECK(plain.values.front() ==
        Catch::Approx(1.0 + 0.9 * std::cos(std::asin(0.5))).margin(1e-12));

  const TimeSeries logged =
      ratio_invariant(ev1, ev2, nu, [](double r) { return std::log(r); }, times);
  CHECK(logged.max_deviation_from_first() < 1e-10);
  CHECK(logged.values.front() == Catch::Approx(std::log(plain.values.front())).margin(1e-12));

  // Mismatched system kinds cannot share a backward orbit.
  const DensityEvolution mapped = density_evolution(
      AnySystem{make_baker(0.5)}, [](const PhasePoint&) { return 1.0; }, "uniform");
  CHECK_THROWS_AS(ratio_invariant(ev1, mapped, nu, identity, times), DegenerateParameterError);
}

TEST_CASE("empirical ratio series under the volume-preserving map") {
  const DiscreteSystem sys = make_baker(0.5);
  const DensityEvolution ev1 = density_evolution(
      AnySystem{sys},
      [](const PhasePoint& p) { return 1.0 + 0.5 * std::sin(2.0 * oracle::pi * p[0]); },
      "x-bump");
  const DensityEvolution ev2 = density_evolution(
      AnySystem{sys}, [](const PhasePoint&) { return 1.0; },
      [](const PhasePoint&) { return 0.0; }, "uniform");

  // A finite orbit's empirical measure is invariant only up to window
  // edges: horizon h swaps h of the S averaged points, so the series can
  // drift by at most h * (max - min) / S. Here the ratio lives in
  // [0.5, 1.5], giving a hard bound of 3/S at the longest horizon.
  const StationaryMeasure emp = birkhoff_empirical(sys, std::nullopt, 10, 5000, 21);
  const TimeSeries s = ratio_invariant(
      ev1, ev2, emp, [](double r) { return r; }, {0.0, 1.0, 2.0, 3.0});
  CHECK(s.max_deviation_from_first() < 3.0 / 5000.0);

  // The edge effect is the whole story: ten times the samples shrinks
  // the bound tenfold.
  const StationaryMeasure wide = birkhoff_empirical(sys, std::nullopt, 10, 50000, 21);
  const TimeSeries s2 = ratio_invariant(
      ev1, ev2, wide, [](double r) { return r; }, {0.0, 1.0, 2.0, 3.0});
  CHECK(s2.max_deviation_from_first() < 3.0 / 50000.0);
}

TEST_CASE("forward and backward rates are opposite in the fixed-point regime") {
  const auto [k_fwd, k_bwd] = reversibility_K_pair(0.6);
  CHECK(k_fwd == Catch::Approx(0.8).margin(1e-12));
  CHECK(k_bwd == Catch::Approx(-0.8).margin(1e-12));
  CHECK(std::fabs(k_fwd + k_bwd) < 1e-12);

  // Circulating regime: one smooth measure serves both arrows of time.
  const auto [c_fwd, c_bwd] = reversibility_K_pair(2.0);
  CHECK(c_fwd == c_bwd);
  CHECK(std::fabs(c_fwd) < 1e-10);

  CHECK_THROWS_AS(reversibility_K_pair(1.0), DegenerateParameterError);
  CHECK_THROWS_AS(reversibility_K_pair(-1.0), DegenerateParameterError);
  const auto marginal = reversibility_K_pair(1.0, true);
  CHECK(marginal.first == 0.0);
  CHECK(marginal.second == 0.0);
}

TEST_CASE("entropy rate functional needs a flow") {
  const DensityEvolution mapped = density_evolution(
      AnySystem{make_baker(0.5)}, [](const PhasePoint&) { return 1.0; }, "uniform");
  CHECK_THROWS_AS(entropy_rate(mapped, 1.0, QuadratureRule::square_dyadic_midpoint(4)),
                  DegenerateParameterError);
}

TEST_CASE("series time validation") {
  const DensityEvolution ev = uniform_circle(0.5);
  const StationaryMeasure nu = dirac(circle_point(0.3));
  CHECK_THROWS_AS(log_density_series(ev, nu, {}), DegenerateParameterError);
  CHECK_THROWS_AS(log_density_series(ev, nu, {-1.0, 0.0}), DegenerateParameterError);
  CHECK_THROWS_AS(log_density_series(ev, nu, {2.0, 1.0}), DegenerateParameterError);
}
