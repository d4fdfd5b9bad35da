#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "fwq/errors.hpp"
#include "fwq/metric_engine.hpp"

using namespace fwq;

namespace {
std::shared_ptr<const DAMapModel> default_da() {
  return std::make_shared<const DAMapModel>(DAMapModel::default_model());
}
}  // namespace

TEST_CASE("yt_distance matches the upper half-plane formula") {
  // lambda = e turns the plane into (y, z = e^-t) with the standard hyperbolic metric
  CHECK(yt_distance(Vec3(0, 0, 0), Vec3(0, 1, 0), std::exp(1.0)) == doctest::Approx(std::acosh(1.5)).epsilon(1e-12));
  CHECK(yt_distance(Vec3(0, 0, 0), Vec3(0, 1, 0), std::exp(1.0)) == doctest::Approx(0.96242365).epsilon(1e-8));
  // vertical pairs are |dt|
  CHECK(yt_distance(Vec3(0, 0.3, -1), Vec3(0, 0.3, 2.5), 2.0) == doctest::Approx(3.5).epsilon(1e-12));
  // symmetric
  const Vec3 a(0, 0.2, 0.1), b(0, -0.7, 1.3);
  CHECK(yt_distance(a, b, 2.6) == doctest::Approx(yt_distance(b, a, 2.6)).epsilon(1e-14));
}

TEST_CASE("yt_geodesic realizes yt_distance") {
  const double lam = (3.0 + std::sqrt(5.0)) / 2.0;
  const MetricField solv = MetricField::solv(lam);
  const Vec3 a(0, -0.4, 0.2), b(0, 0.9, -0.5);
  const Polyline3 g = yt_geodesic(a, b, lam, 256);
  CHECK((g.points.front() - a).norm() < 1e-12);
  CHECK((g.points.back() - b).norm() < 1e-12);
  CHECK(length(g, solv) == doctest::Approx(yt_distance(a, b, lam)).epsilon(2e-4));
  CHECK(length(g, solv) >= yt_distance(a, b, lam) * (1 - 1e-9));
}

TEST_CASE("Solv segment lengths in closed form") {
  const double lam = 2.0;
  const MetricField m = MetricField::solv(lam);
  // horizontal x-segment at height t has length lambda^-t |dx|
  CHECK(segment_length(Vec3(0, 0, 1.5), Vec3(2, 0, 1.5), m) == doctest::Approx(2.0 * std::pow(lam, -1.5)).epsilon(1e-9));
  CHECK(segment_length(Vec3(0, 0, 1.5), Vec3(0, 2, 1.5), m) == doctest::Approx(2.0 * std::pow(lam, 1.5)).epsilon(1e-9));
  CHECK(segment_length(Vec3(1, 1, -2), Vec3(1, 1, 3), m) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("level metric is lambda^{2t} dy^2 + dt^2 on the plane x = 0 and dominates it elsewhere") {
  const auto da = default_da();
  const MetricField g = MetricField::level(da);
  const double L = std::log(da->lambda());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.4, 0.4), T(-2, 2);
  std::normal_distribution<double> N(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double y = U(rng), t = T(rng);
    const Mat3 G = g.tensor_at(Vec3(0, y, t));
    CHECK(G(1, 1) == doctest::Approx(std::exp(2 * t * L)).epsilon(1e-9));
    CHECK(G(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(G(1, 2)) < 1e-9 * std::exp(t * L));
    const Vec3 q(U(rng), U(rng), t);
    const Vec3 v(N(rng), N(rng), N(rng));
    const double lhs = v.dot(g.tensor_at(q) * v);
    const double rhs = std::exp(2 * t * L) * v.y() * v.y() + v.z() * v.z();
    CHECK(lhs >= rhs * (1 - 1e-9));
  }
}

TEST_CASE("level metric has G_tt = 1; h_pullback does not") {
  const auto da = default_da();
  const MetricField g = MetricField::level(da);
  const MetricField h = MetricField::h_pullback(da);
  const Vec3 q(0.06, 0.02, 0.3);  // inside the blow-up region
  CHECK(g.tensor_at(q)(2, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h.tensor_at(q)(2, 2) > 1.0);
  CHECK(g.in_slab(q));
  // metric tensors are symmetric and positive definite
  for (const auto* m : {&g, &h}) {
    const Mat3 G = m->tensor_at(q);
    CHECK((G - G.transpose()).norm() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(G).eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("deck transformations are isometries of the level metric") {
  const auto da = default_da();
  const MetricField g = MetricField::level(da);
  for (DeckGen gen : {DeckGen::Gamma, DeckGen::E1, DeckGen::E2}) {
    const double r = verify_isometry([&](const Vec3& q) { return da->deck_apply(gen, q); }, g, 300, 42);
    CHECK(r < 1e-5);
  }
}

TEST_CASE("mu_a is a Solv isometry but not a level-metric one") {
  const auto da = default_da();
  const double lam = da->lambda();
  const MetricField s = MetricField::solv(lam);
  const MetricField g = MetricField::level(da);
  for (double a : {-1.0, 0.37, 2.0}) {
    auto mu = [=](const Vec3& q) { return mu_a(q, a, lam); };
    CHECK(verify_isometry(mu, s, 300, 5) < 1e-6);
  }
  CHECK(verify_isometry([=](const Vec3& q) { return mu_a(q, 0.37, lam); }, g, 300, 5) > 1e-2);
  CHECK((mu_a(mu_a(Vec3(0.1, 0.2, 0.3), 0.5, lam), -0.5, lam) - Vec3(0.1, 0.2, 0.3)).norm() < 1e-14);
}

TEST_CASE("grid_distance agrees with the yt closed form within kappa") {
  const MetricField s = MetricField::solv(std::exp(1.0));
  const DistanceResult d = grid_distance(Vec3(0, 0, 0), Vec3(0, 1, 0), s);
  const double exact = std::acosh(1.5);
  CHECK(d.lower_bound <= exact);
  CHECK(d.upper_bound >= exact * (1 - 1e-9));
  CHECK(std::abs(d.value - exact) <= d.kappa * exact);
  CHECK(d.value == doctest::Approx(0.962465).epsilon(1e-4));
  CHECK(d.graph_value >= d.value);
  CHECK(d.kappa <= 0.10);
  CHECK(d.lower_bound <= d.value);
  // d(p, p) = 0
  CHECK(grid_distance(Vec3(0.1, 0, 0), Vec3(0.1, 0, 0), s).value == 0.0);
}

TEST_CASE("vertical level-metric distances are exact") {
  const MetricField g = MetricField::level(default_da());
  const DistanceResult d = grid_distance(Vec3(0.01, 0.02, -1), Vec3(0.01, 0.02, 6), g);
  CHECK(d.value == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(d.lower_bound <= 7.0);
}

TEST_CASE("grid_distance reports an exhausted node budget") {
  const MetricField s = MetricField::solv(2.0);
  GridOptions o;
  o.max_nodes = 50;
  CHECK_THROWS_AS(grid_distance(Vec3(0, 0, 0), Vec3(0, 1, 1), s, o), Error);
}

TEST_CASE("refine_path never lengthens and shortens a detour") {
  const MetricField s = MetricField::solv(2.0);
  Polyline3 p;
  p.points = {Vec3(0, 0, 0), Vec3(0, 0.5, 1.0), Vec3(0, 1, 0)};
  const double before = length(p, s);
  const Polyline3 r = refine_path(p, s);
  const double after = length(r, s);
  CHECK(after <= before);
  CHECK(after >= yt_distance(Vec3(0, 0, 0), Vec3(0, 1, 0), 2.0) * (1 - 1e-9));
  CHECK((r.points.front() - p.points.front()).norm() == 0.0);
  CHECK((r.points.back() - p.points.back()).norm() == 0.0);
}

TEST_CASE("distance CSV carries h and tol on every row") {
  DistanceResult r;
  r.value = 1;
  r.grid_h = 0.05;
  r.kappa = 0.1;
  const std::string body = distance_csv_body({{"a", r}, {"b", r}});
  CHECK(body.rfind("query_id,value,lower,upper,h,tol\n", 0) == 0);
  CHECK(body.find("a,1,0,0,0.05,0.1\n") != std::string::npos);
}
