#include <doctest.h>

#include <cmath>
#include <memory>

#include "fwq/errors.hpp"
#include "fwq/plug_builder.hpp"

using namespace fwq;

namespace {
std::shared_ptr<const DAMapModel> default_da() {
  static const auto da = std::make_shared<const DAMapModel>(DAMapModel::default_model());
  return da;
}
PlugModel default_plug(PlugMode mode = PlugMode::attracting) { return PlugModel(default_da(), 0.008, 1.0, mode); }
}  // namespace

TEST_CASE("tube invariants on the default model") {
  const PlugModel plug = default_plug();
  CHECK(plug.invariant_violations().empty());
  CHECK(plug.tube().gamma_residual(plug.da()) < 1e-14);
  CHECK(plug.tube().min_gap_slope() == doctest::Approx(0.1823).epsilon(1e-3));
  CHECK(circle_closure_residual(plug) < 1e-14);
}

TEST_CASE("tube parametrization round trip and gauge") {
  const TubeModel& tube = default_plug().tube();
  for (double u : {0.0, 0.1, 0.25, 0.6, 0.93})
    for (double t : {-0.9, 0.0, 0.4, 3.0}) {
      const Vec3 p = tube.point(u, t);
      CHECK(tube.gauge(p) == doctest::Approx(1.0).epsilon(1e-13));
      const Vec2 uv = tube.param(p);
      CHECK(std::abs(uv.x() - u) < 1e-12);
      CHECK(uv.y() == t);
    }
  // blend weights interpolate Phi^-1 at t = 1 and vanish at t = 0
  CHECK(tube.beta_x(0.0) == 0.0);
  CHECK(tube.beta_y(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tube too wide for D1 is reported") {
  const PlugModel wide(default_da(), 0.02, 1.0);  // A(t_min) exceeds r1
  CHECK(!wide.invariant_violations().empty());
}

TEST_CASE("plugs need the source template") {
  const IntMat2 m{{{2, 1}, {1, 1}}};
  const auto sink = std::make_shared<const DAMapModel>(m, 0.025, 0.25, 3.0, DAMode::sink);
  CHECK_THROWS_AS(PlugModel(sink, 0.008), Error);
}

TEST_CASE("repelling plug reverses physical time") {
  const PlugModel a = default_plug(), r = default_plug(PlugMode::repelling);
  const Vec3 q(0.001, 0.02, 0.5);
  CHECK((a.flow(q, 2.0) - Vec3(0.001, 0.02, 2.5)).norm() == 0.0);
  CHECK((r.flow(q, 2.0) - Vec3(0.001, 0.02, -1.5)).norm() == 0.0);
  CHECK(r.return_map_mode() == DAMode::sink);
}

TEST_CASE("the orbit through (0, 2r, 0) enters the tube at t = -log 2 / log lambda") {
  const PlugModel plug = default_plug();
  const double c = 2 * 0.008;
  const double t_hit = -std::log(2.0) / std::log(plug.da().lambda());
  CHECK(t_hit == doctest::Approx(-0.72021).epsilon(1e-5));
  for (double tp : {1.0, 5.0, 20.0}) {
    const auto hit = plug.first_boundary_hit(Vec3(0, c, tp), Direction::backward);
    REQUIRE(hit);
    CHECK(hit->point.z() == doctest::Approx(t_hit).epsilon(1e-9));
    CHECK(plug.ell(Vec3(0, c, tp)) == doctest::Approx(tp - t_hit).epsilon(1e-9));
  }
  // points inside the tube have no backward hit
  CHECK(!plug.first_boundary_hit(Vec3(0, 0.001, 0.0), Direction::backward));
}

TEST_CASE("distance to the boundary: ordering, oracle and grid cross-check") {
  const PlugModel plug = default_plug();
  const MetricField g = MetricField::level(plug.da_ptr());
  const double c = 0.016, lam = plug.da().lambda();
  // frozen closed-form yt wedge distances for the orbit through (0, c, 0)
  const double wedge[][2] = {{1, 0.033877}, {2, 0.101463}, {5, 1.441637}, {10, 6.375801}};
  for (const auto& [tp, w] : wedge) {
    CHECK(yt_wedge_distance(c, tp, 0.008, lam) == doctest::Approx(w).epsilon(2e-6));
    const DistanceResult d = dist_to_boundary(Vec3(0, c, tp), plug, g);
    CHECK(d.lower_bound <= d.upper_bound);
    CHECK(d.lower_bound <= yt_wedge_distance(c, tp, 0.008, lam) + 1e-12);
    CHECK(d.upper_bound <= plug.ell(Vec3(0, c, tp)) + 1e-12);
  }
  const DistanceResult inside = dist_to_boundary(Vec3(0, 0, 2), plug, g);
  CHECK(inside.value == 0.0);

  // both sets of bounds must sandwich the same number
  for (double tp : {2.0, 5.0}) {
    const Vec3 q(0.0, c, tp);
    const DistanceResult a = dist_to_boundary(q, plug, g);
    const DistanceResult b = dist_to_boundary_grid(q, plug, g);
    CHECK(a.lower_bound <= b.upper_bound * (1 + 1e-9));
    CHECK(b.lower_bound <= a.upper_bound);
    CHECK(b.lower_bound == 0.0);  // h = 0.05 does not resolve an r_tube = 0.008 tube
  }
  // once the distance is long compared to the tube the lattice value is close
  const Vec3 q5(0.0, c, 5.0);
  const double up = dist_to_boundary(q5, plug, g).upper_bound;
  CHECK(std::abs(dist_to_boundary_grid(q5, plug, g).value - up) <= 0.1 * up);
}

TEST_CASE("boundary circles lie on y = 0 and on the tube") {
  const PlugModel plug = default_plug();
  const auto [c1, c2] = boundary_circles(plug);
  REQUIRE(c1.points.size() == 33);
  for (const auto* c : {&c1, &c2})
    for (const auto& p : c->points) {
      CHECK(p.y() == 0.0);
      CHECK(plug.tube().gauge(p) == doctest::Approx(1.0).epsilon(1e-12));
    }
  CHECK(c1.points.front().x() > 0);
  CHECK(c2.points.front().x() < 0);
  CHECK(plug.torus_param(c1.points[5]).x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plug.torus_param(c2.points[5]).x() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("boundary foliation: circles, line field and leaf crossings") {
  const PlugModel plug = default_plug();
  const BoundaryFoliationModel f(plug);
  for (double tau : {0.0, 0.3, 0.77}) {
    CHECK(f.circle_distance(0.0, tau) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.circle_distance(0.5, tau) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.circle_distance(0.25, tau) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(f.line_field(0.3, tau).norm() == doctest::Approx(1.0));
  }
  // the circles themselves are leaves: vertical line field there
  CHECK(std::abs(f.line_field(0.0, 0.2).x()) < 1e-15);
  CHECK(std::abs(f.line_field(0.5, 0.2).x()) < 1e-15);
  for (double u : {0.1, 0.2, 0.35, 0.6, 0.9}) CHECK(f.leaf_crossings(u, 0.0) == 1);
  CHECK(f.bad(0.01, 0.4, 0.05));
  CHECK(!f.bad(0.25, 0.4, 0.05));
  CHECK(bad_region_test(f, plug, plug.boundary_point(0.51, 0.2), 0.05));
  CHECK(f.diameter() == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("stable companions and their contraction") {
  const PlugModel plug = default_plug();
  const MetricField g = MetricField::level(plug.da_ptr());
  CHECK_THROWS_AS(stable_companion(plug, plug.boundary_point(0.0, 0.3)), Error);
  const Vec3 b = plug.boundary_point(0.2, 0.3);
  const Companion cm = stable_companion(plug, b);
  CHECK(cm.bbar.x() == 0.0);
  CHECK(cm.bbar.y() == b.y());
  // the companion sits on the tube trace in the plane x = 0
  CHECK(std::abs(cm.bbar.y()) == doctest::Approx(plug.tube().B(cm.bbar.z())).epsilon(1e-12));
  const double g5 = companion_gap(plug, g, b, cm, 5.0), g10 = companion_gap(plug, g, b, cm, 10.0);
  CHECK(g10 / g5 < 2.0 * std::pow(plug.da().lambda(), -5.0));
}

TEST_CASE("collar crossing length equals the collar thickness") {
  CHECK(collar_epsilon(default_plug()) == doctest::Approx(1.0).epsilon(1e-9));
}
