#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "edlab/time_series.hpp"
#include "oracles.hpp"

using namespace edlab;

TEST_CASE("line fit on a worked example") {
  TimeSeries s;
  s.times = {0.0, 1.0, 2.0};
  s.values = {0.0, 1.0, 1.0};

  const LinearFit fit = fit_linear(s);
  CHECK(fit.slope == Catch::Approx(0.5).margin(1e-15));
  CHECK(fit.intercept == Catch::Approx(1.0 / 6.0).margin(1e-15));
  CHECK(fit.max_abs_residual == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("line fit agrees with the normal equations") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> noise(-0.5, 0.5);

  TimeSeries s;
  for (int i = 0; i <= 40; ++i) {
    s.times.push_back(0.25 * i);
    s.values.push_back(1.7 - 0.3 * s.times.back() + noise(rng));
  }

  const LinearFit fit = fit_linear(s);
  const auto [slope, intercept] = oracle::plain_least_squares(s.times, s.values);
  CHECK(fit.slope == Catch::Approx(slope).margin(1e-12));
  CHECK(fit.intercept == Catch::Approx(intercept).margin(1e-12));
}

TEST_CASE("line fit recovers an exact line with negligible residual") {
  TimeSeries s;
  for (int i = 0; i < 11; ++i) {
    s.times.push_back(0.5 * i);
    s.values.push_back(-2.0 + 0.8660254037844386 * s.times.back());
  }
  const LinearFit fit = fit_linear(s);
  CHECK(fit.slope == Catch::Approx(0.8660254037844386).margin(1e-14));
  CHECK(fit.intercept == Catch::Approx(-2.0).margin(1e-14));
  CHECK(fit.max_abs_residual < 1e-14);
}

TEST_CASE("degenerate fits are refused") {
  TimeSeries one;
  one.times = {1.0};
  one.values = {2.0};
  CHECK_THROWS_AS(fit_linear(one), DegenerateTimesError);

  TimeSeries mismatched;
  mismatched.times = {0.0, 1.0, 2.0};
  mismatched.values = {0.0, 1.0};
  CHECK_THROWS_AS(fit_linear(mismatched), DegenerateTimesError);
}

TEST_CASE("constancy diagnostic reports the largest drift") {
  TimeSeries s;
  s.times = {0.0, 1.0, 2.0, 3.0};
  s.values = {2.0, 2.0 + 1e-9, 2.0 - 3e-9, 2.0};
  CHECK(s.max_deviation_from_first() == Catch::Approx(3e-9).margin(1e-18));
  CHECK(s.size() == 4);

  TimeSeries flat;
  flat.times = {0.0, 1.0};
  flat.values = {5.0, 5.0};
  CHECK(flat.max_deviation_from_first() == 0.0);
}
