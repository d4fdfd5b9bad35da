#include <doctest.h>

#include <cmath>
#include <memory>

#include "fwq/errors.hpp"
#include "fwq/qg_analysis.hpp"

using namespace fwq;

namespace {
std::shared_ptr<const DAMapModel> default_da() {
  static const auto da = std::make_shared<const DAMapModel>(DAMapModel::default_model());
  return da;
}
const PlugModel& default_plug() {
  static const PlugModel p(default_da(), 0.008, 1.0);
  return p;
}
constexpr double kC = 0.016;  // 2 r_tube
}  // namespace

TEST_CASE("k' is the last crossing of P = 1") {
  const PlugModel& plug = default_plug();
  const double kp = k_prime(plug, kC);
  CHECK(kp == doctest::Approx(14.092254247641268).epsilon(1e-9));
  CHECK(P_of(kp, plug, kC) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(P_of(kp + 1.0, plug, kC) > 1.0);
  CHECK(R_of(3.0, plug, kC) > 0);
  CHECK(R_of(3.0, plug, kC) < kC);
}

TEST_CASE("yt tube distance sandwiches the closed-form wedge distance") {
  const PlugModel& plug = default_plug();
  const double lam = plug.da().lambda();
  const double frozen_upper[][2] = {{1, 0.03389}, {2, 0.10163}, {5, 1.44168}, {10, 6.3758}, {20, 16.3758}};
  for (const auto& [tp, up] : frozen_upper) {
    const YtTubeDistance d = yt_tube_distance(Vec3(0, kC, tp), plug);
    const double w = yt_wedge_distance(kC, tp, 0.008, lam);
    CHECK(d.lower <= w + 1e-12);
    CHECK(d.upper >= w - 1e-12);
    CHECK(d.upper == doctest::Approx(up).epsilon(2e-4));
  }
}

TEST_CASE("inequality e4 holds on the orbit through (0, 2 r_tube, 0)") {
  const E4Report r = verify_e4(default_plug(), kC, {1, 2, 5, 10, 20, 30}, 0.02);
  CHECK(r.violations == 0);
  REQUIRE(r.rows.size() == 6);
  for (const auto& row : r.rows) {
    CHECK(row.residual <= 0);
    CHECK(row.d_lo <= row.d_hi);
    CHECK(row.c0.ok());
    CHECK(row.ell == doctest::Approx(row.t_prime + std::log(2.0) / std::log(default_plug().da().lambda())));
  }
  CHECK(r.min_slope > 0);
  // residual decreases in t' once ell > k'
  CHECK(r.rows[5].residual < r.rows[4].residual);
  const std::string body = r.csv_body();
  CHECK(body.rfind("t_prime,ell,d_lo,d_hi,k_prime,residual,residual_lo,claim_c0,h,tol\n", 0) == 0);
}

TEST_CASE("constant arithmetic is exact") {
  CHECK(prop_key_constants(2, 1, 0.5, 3) == std::pair<double, double>(2, 6));
  CHECK(compose_constants(3, 1, 2, 1) == std::pair<double, double>(20, 7));
  CHECK_THROWS_AS(prop_key_constants(0.5, 1, 1, 1), Error);
  CHECK_THROWS_AS(compose_constants(3, -1, 2, 1), Error);
}

TEST_CASE("fit_constants covers every sample") {
  std::vector<FitSample> s;
  for (int d = 1; d <= 10; ++d) s.push_back({2.0 * d + 3.0, double(d)});
  const auto [C, c] = fit_constants(s, 0.05);
  for (const auto& x : s) CHECK(x.length <= C * x.distance + c + 1e-12);
  CHECK(C >= 0);
  CHECK(fit_slope_at(s, 3.0, 0.05) == doctest::Approx(2.0));
  CHECK_THROWS_AS(fit_constants({{1.0, 1.0}}, 0.05), Error);
  CHECK_THROWS_AS(fit_constants({{1.0, 0.01}, {2.0, 0.02}}, 0.05), Error);
}

TEST_CASE("Solv and level metric agree on the plane x = 0") {
  const Distortion d = measure_distortion(MetricField::level(default_da()), 50, 17);
  CHECK(d.a0 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.a1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(d.n_curves == 50);
}

TEST_CASE("small key-proposition scan: zero violations and logged constants") {
  const PlugModel& plug = default_plug();
  const BoundaryFoliationModel fol(plug);
  KeyScanOptions o;
  o.n_u = 8;
  o.n_tau = 2;
  o.t_grid = {1, 5};
  o.K = 2;
  o.k = k_prime(plug, kC);
  const QGReport r = prop_key_scan(plug, fol, MetricField::level(default_da()), o);
  CHECK(r.verified());
  CHECK(r.violations_lo == 0);
  CHECK(r.C == 2.0);
  CHECK(r.inputs.at("s1").value > 0);
  CHECK(std::isfinite(r.inputs.at("s2").value));
  CHECK(r.inputs.at("delta1").value == doctest::Approx(0.5 * r.inputs.at("s1").value));
  CHECK(r.rows.size() == std::size_t(2 * r.inputs.at("n_good_samples").value));
  CHECK(r.to_json()["source"] == "composed");

  o.delta = 1.0;  // wider than the torus
  CHECK_THROWS_AS(prop_key_scan(plug, fol, MetricField::level(default_da()), o), Error);
}
