#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "edlab/domain.hpp"
#include "oracles.hpp"

using namespace edlab;

TEST_CASE("angles wrap into [-pi, pi)") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(oracle::pi) == Catch::Approx(-oracle::pi));
  CHECK(wrap_angle(3.0 * oracle::pi / 2.0) == Catch::Approx(-oracle::pi / 2.0).margin(1e-12));
  CHECK(wrap_angle(-5.0 * oracle::pi) == Catch::Approx(-oracle::pi));
  CHECK(wrap_angle(2.0 * oracle::pi) == Catch::Approx(0.0).margin(1e-15));

  // Wrapping an already-canonical coordinate must not move it.
  const double x = 1.2345;
  CHECK(wrap_angle(x) == x);

  // Never returns a value on the excluded right endpoint.
  for (double probe : {1e6, -1e6, 12345.6789, oracle::pi - 1e-16}) {
    const double w = wrap_angle(probe);
    CHECK(w >= -oracle::pi);
    CHECK(w < oracle::pi);
  }
}

TEST_CASE("unit coordinates wrap into [0, 1)") {
  CHECK(wrap_unit(0.0) == 0.0);
  CHECK(wrap_unit(1.0) == 0.0);
  CHECK(wrap_unit(1.25) == Catch::Approx(0.25).margin(1e-15));
  CHECK(wrap_unit(-0.5) == Catch::Approx(0.5).margin(1e-15));
  CHECK(wrap_unit(-3.0) == 0.0);
  CHECK(wrap_unit(0.999999) == Catch::Approx(0.999999));
}

TEST_CASE("point constructors wrap on construction") {
  const PhasePoint p = square_point(1.25, -0.5);
  CHECK(p.domain == Domain::unit_square);
  CHECK(p[0] == Catch::Approx(0.25).margin(1e-15));
  CHECK(p[1] == Catch::Approx(0.5).margin(1e-15));

  const PhasePoint q = circle_point(3.0 * oracle::pi);
  CHECK(q.domain == Domain::circle);
  CHECK(q[0] == Catch::Approx(-oracle::pi));
  CHECK(q[1] == 0.0);
}

TEST_CASE("wrap re-canonicalizes a drifted point") {
  PhasePoint p = circle_point(1.0);
  p[0] += 2.0 * oracle::pi;
  const PhasePoint w = wrap(p);
  CHECK(w[0] == Catch::Approx(1.0).margin(1e-14));

  PhasePoint s = square_point(0.75, 0.25);
  s[0] += 1.0;
  s[1] -= 2.0;
  const PhasePoint ws = wrap(s);
  CHECK(ws[0] == Catch::Approx(0.75).margin(1e-15));
  CHECK(ws[1] == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("periodic gap measures the short way around") {
  CHECK(periodic_gap(0.1, 0.3, 2.0 * oracle::pi) == Catch::Approx(0.2));
  CHECK(periodic_gap(-oracle::pi + 0.1, oracle::pi - 0.1, 2.0 * oracle::pi) ==
        Catch::Approx(0.2).margin(1e-12));
  CHECK(periodic_gap(0.25, 0.875, 1.0) == Catch::Approx(0.375));
  CHECK(periodic_gap(0.05, 0.95, 1.0) == Catch::Approx(0.1).margin(1e-12));
  CHECK(periodic_gap(0.5, 0.5, 1.0) == 0.0);
}

TEST_CASE("domain distance respects the wrap") {
  // Circle: shortest arc.
  CHECK(domain_distance(circle_point(-oracle::pi + 0.05), circle_point(oracle::pi - 0.05)) ==
        Catch::Approx(0.1).margin(1e-12));
  CHECK(domain_distance(circle_point(1.0), circle_point(1.0)) == 0.0);

  // Square: Euclidean length of the per-axis gaps.
  const double d = domain_distance(square_point(0.1, 0.9), square_point(0.9, 0.1));
  CHECK(d == Catch::Approx(0.2 * std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("domain descriptors") {
  CHECK(domain_dimension(Domain::circle) == 1);
  CHECK(domain_dimension(Domain::unit_square) == 2);
  CHECK(domain_volume(Domain::circle) == Catch::Approx(2.0 * oracle::pi));
  CHECK(domain_volume(Domain::unit_square) == 1.0);
  CHECK(domain_name(Domain::circle) == "circle");
  CHECK(domain_name(Domain::unit_square) == "unit-square");
}

TEST_CASE("phase point accessors are read-write") {
  PhasePoint p = square_point(0.25, 0.75);
  p[0] = 0.5;
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.75);
  CHECK(p.dimension() == 2);
}
