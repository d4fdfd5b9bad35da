#include <doctest.h>

#include <cmath>

#include "fwq/errors.hpp"
#include "fwq/geoflow_h2.hpp"

using namespace fwq;

TEST_CASE("geodesics have unit hyperbolic speed and stay in the half-plane") {
  for (const Vec2 v : {Vec2(1, 0), Vec2(0, 1), Vec2(0, -2), Vec2(-0.3, 0.8)}) {
    const Vec2 p(0.2, 0.7);
    for (double t : {0.0, 0.5, 2.0, -1.3}) {
      const TangentPoint g = h2_geodesic(p, v, t);
      CHECK(g.p.y() > 0);
      CHECK(hyp_norm(g.p, g.v) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const TangentPoint g0 = h2_geodesic(p, v, 0.0);
    CHECK((g0.p - p).norm() < 1e-12);
    CHECK((g0.v.normalized() - v.normalized()).norm() < 1e-12);
  }
}

TEST_CASE("vertical geodesic is y = y0 e^t") {
  const TangentPoint g = h2_geodesic(Vec2(1, 2), Vec2(0, 1), 1.5);
  CHECK(g.p.x() == 1.0);
  CHECK(g.p.y() == doctest::Approx(2.0 * std::exp(1.5)).epsilon(1e-14));
}

TEST_CASE("geodesic distance matches the half-plane formula") {
  const Vec2 p(0.0, 1.0);
  const TangentPoint g = h2_geodesic(p, Vec2(1, 0.3), 2.2);
  const double d = std::acosh(1.0 + (g.p - p).squaredNorm() / (2.0 * p.y() * g.p.y()));
  CHECK(d == doctest::Approx(2.2).epsilon(1e-10));
}

TEST_CASE("geodesic flow lines have Sasaki length T") {
  const TangentCurve c = geodesic_trajectory(Vec2(0.1, 1.0), Vec2(0.6, -0.8), 3.0, 2000);
  CHECK(sasaki_length(c) == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(base_length(c) == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("flow trajectories beat perturbed competitors") {
  const MinimalityReport r = verify_flowline_minimality(Vec2(0.0, 1.0), Vec2(1, 0), 3.0, 100, 9);
  CHECK(r.violations == 0);
  CHECK(r.zero_amplitude_gap <= 1e-8);
  REQUIRE(r.min_margin.size() == 3);
  CHECK(r.min_margin[0] > 0);
  // bigger bumps cost more
  CHECK(r.min_margin[0] < r.min_margin[2]);
  CHECK(r.to_json()["violations"] == 0);
}

TEST_CASE("minimality inputs are validated") {
  CHECK_THROWS_AS(verify_flowline_minimality(Vec2(0, 1), Vec2(1, 0), 0.0, 5, 1), Error);
  CHECK_THROWS_AS(h2_geodesic(Vec2(0, -1), Vec2(1, 0), 1.0), Error);
  CHECK_THROWS_AS(h2_geodesic(Vec2(0, 1), Vec2(0, 0), 1.0), Error);
}

TEST_CASE("transfer constants") {
  const auto [A0, A1] = transfer_constants(2, 1, 3, 1);
  CHECK(A0 == 6.0);
  CHECK(A1 == 4.0);
  CHECK_THROWS_AS(transfer_constants(0, 1, 1, 1), Error);
  CHECK_THROWS_AS(transfer_constants(1, 1, 1, -1), Error);
}
