#include "fwq/qg_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fwq/artifacts.hpp"
#include "fwq/errors.hpp"

namespace fwq {

double R_of(double t, const PlugModel& plug, double c) {
  const TubeModel& tube = plug.tube();
  double lo = 0.0, hi = std::max(c, tube.B(t)) + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (tube.gap(Vec2(0.0, mid), t) < 0) lo = mid; else hi = mid;
  }
  return std::abs(c - 0.5 * (lo + hi));
}

double P_of(double t, const PlugModel& plug, double c) {
  return R_of(0.5 * t, plug, c) * std::pow(plug.da().lambda(), 0.5 * t) / t;
}

double k_prime(const PlugModel& plug, double c, double t_max) {
  const int n = 600;
  const double t0 = 1e-2;
  std::vector<double> grid(n + 1);
  for (int i = 0; i <= n; ++i) grid[i] = t0 * std::pow(t_max / t0, double(i) / n);
  if (P_of(grid[n], plug, c) <= 1.0)
    throw Error(Errc::ThresholdNotFound, "P_q never exceeds 1 up to t_max = " + num(t_max));
  int last = -1;
  for (int i = 0; i <= n; ++i)
    if (P_of(grid[i], plug, c) <= 1.0) last = i;
  if (last < 0) return grid[0];
  double lo = grid[last], hi = grid[last + 1];
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (P_of(mid, plug, c) <= 1.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

YtTubeDistance yt_tube_distance(const Vec3& q, const PlugModel& plug, double h) {
  const TubeModel& tube = plug.tube();
  const double lam = plug.da().lambda();
  YtTubeDistance r;
  r.h = h;
  const Vec3 qq(0.0, q.y(), q.z());
  const double t_lo = tube.t_min();
  // the flow segment bounds the distance by q.z - t_lo, so trace points above
  // t_hi cannot be closer than the samples below it
  const double t_hi = std::max(q.z(), t_lo) + std::max(q.z() - t_lo, 0.0) + 1.0;
  const int n = int(std::ceil((t_hi - t_lo) / h));
  const double sgn = q.y() < 0 ? -1.0 : 1.0;
  std::vector<double> d(n + 1);
  int best = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / n;
    d[i] = yt_distance(qq, Vec3(0.0, sgn * tube.B(t), t), lam);
    if (d[i] < d[best]) best = i;
  }
  // the trace has constant yt speed sqrt(1 + (r log lambda)^2) in t
  const double L = std::log(lam);
  const double arc = (t_hi - t_lo) / n * std::sqrt(1.0 + std::pow(tube.r_tube() * L, 2));
  double lower = INFINITY;
  for (int i = 0; i < n; ++i) lower = std::min(lower, std::min(d[i], d[i + 1]) - 0.5 * arc);
  lower = std::min({lower, t_hi - q.z(), q.z() - t_lo});
  const double tb = t_lo + (t_hi - t_lo) * best / n;
  r.foot = Vec3(0.0, sgn * tube.B(tb), tb);
  r.upper = d[best];
  r.lower = std::clamp(lower, 0.0, r.upper);
  r.witness = yt_geodesic(qq, r.foot, lam, 32);
  return r;
}

ClaimC0 verify_claim_c0(const Vec3& q, const Polyline3& witness, double d_upper, const PlugModel& plug, double c,
                        double tol) {
  ClaimC0 r;
  r.tol = tol;
  r.t_low = INFINITY;
  for (const auto& p : witness.points) r.t_low = std::min(r.t_low, p.z());
  const double lam = plug.da().lambda();
  const auto hit = plug.first_boundary_hit(Vec3(0.0, c, q.z()), Direction::backward);
  const double t_start = hit ? hit->point.z() : plug.tube().t_min();
  r.drop_residual = (q.z() - r.t_low) - d_upper - tol;
  r.spread_residual = (r.t_low >= t_start ? R_of(r.t_low, plug, c) * std::pow(lam, r.t_low) : 0.0) - d_upper - tol;
  r.floor_residual = (t_start - r.t_low) - tol;
  return r;
}

nlohmann::json E4Report::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"t_prime", r.t_prime}, {"ell", r.ell}, {"d_lo", r.d_lo}, {"d_hi", r.d_hi},
                  {"residual", r.residual}, {"residual_lo", r.residual_lo},
                  {"claim_c0", {{"t_low", r.c0.t_low}, {"drop_residual", r.c0.drop_residual},
                                {"spread_residual", r.c0.spread_residual}, {"floor_residual", r.c0.floor_residual},
                                {"ok", r.c0.ok()}}}});
  return {{"c", c}, {"k_prime", k_prime}, {"h", h}, {"tol", tol}, {"violations", violations},
          {"min_slope", min_slope}, {"rows", rs}};
}

std::string E4Report::csv_body() const {
  CsvWriter w({"t_prime", "ell", "d_lo", "d_hi", "k_prime", "residual", "residual_lo", "claim_c0", "h", "tol"});
  for (const auto& r : rows)
    w.row({num(r.t_prime), num(r.ell), num(r.d_lo), num(r.d_hi), num(k_prime), num(r.residual), num(r.residual_lo),
           r.c0.ok() ? "1" : "0", num(h), num(r.c0.tol)});
  return w.body();
}

E4Report verify_e4(const PlugModel& plug, double c, const std::vector<double>& t_grid, double h, double t_max) {
  E4Report rep;
  rep.c = c;
  rep.h = h;
  rep.k_prime = k_prime(plug, c, t_max);
  rep.min_slope = INFINITY;
  for (double tp : t_grid) {
    const Vec3 q(0.0, c, tp);
    const double ell = plug.ell(q);
    const YtTubeDistance d = yt_tube_distance(q, plug, h);
    const double tol = d.upper - d.lower;
    E4Row row{tp, ell, d.lower, d.upper, ell - 2.0 * d.upper - rep.k_prime, ell - 2.0 * d.lower - rep.k_prime,
              verify_claim_c0(q, d.witness, d.upper, plug, c, tol + 1e-9)};
    rep.tol = std::max(rep.tol, tol);
    if (row.residual > 0 || !row.c0.ok()) ++rep.violations;
    if (ell > rep.k_prime && d.upper > 0) rep.min_slope = std::min(rep.min_slope, (ell - rep.k_prime) / d.upper);
    rep.rows.push_back(row);
  }
  if (!std::isfinite(rep.min_slope)) rep.min_slope = 0.0;
  return rep;
}

std::pair<double, double> prop_key_constants(double K, double k, double s1, double s2) {
  if (!(K >= 1) || !(k >= 0) || !(s1 >= 0) || !(s2 >= 0))
    throw Error(Errc::DomainError, "prop_key_constants needs K >= 1 and k, s1, s2 >= 0");
  return {K, K * s1 + k + 2.0 * s1 + s2};
}

std::pair<double, double> compose_constants(double C1, double c1, double a3, double a4) {
  if (!(C1 >= 1) || !(a3 >= 1) || !(c1 >= 0) || !(a4 >= 0))
    throw Error(Errc::DomainError, "compose_constants needs C1, a3 >= 1 and c1, a4 >= 0");
  return {2.0 * C1 + 2.0 * a3 * C1 + a3, 2.0 * c1 + 2.0 * a3 * c1 + a4};
}

double fit_slope_at(const std::vector<FitSample>& s, double c, double h) {
  double C = 0.0;
  for (const auto& x : s) C = std::max(C, (x.length - c) / std::max(x.distance, h));
  for (const auto& x : s)
    if (x.length > C * x.distance + c) return INFINITY;  // a sample below h that the slope cannot cover
  return C;
}

std::pair<double, double> fit_constants(const std::vector<FitSample>& samples, double h) {
  if (samples.size() < 2) throw Error(Errc::Degenerate, "fit_constants needs at least 2 samples");
  bool any = false;
  for (const auto& x : samples) {
    if (!(x.distance >= 0)) throw Error(Errc::DomainError, "distances must be nonnegative");
    any = any || x.distance >= h;
  }
  if (!any) throw Error(Errc::Degenerate, "all distances are below the grid spacing");
  double bestC = INFINITY, bestc = 0.0, bestObj = INFINITY;
  for (int i = 0; i <= 40; ++i) {
    const double c = 0.5 * i;
    const double C = fit_slope_at(samples, c, h);
    if (C + 0.01 * c < bestObj) {
      bestObj = C + 0.01 * c;
      bestC = C;
      bestc = c;
    }
  }
  if (!std::isfinite(bestC)) throw Error(Errc::Degenerate, "no intercept on the grid covers every sample");
  return {bestC, bestc};
}

Distortion measure_distortion(const MetricField& level, int n_curves, std::uint64_t seed) {
  const MetricField solv = MetricField::solv(level.lambda());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> Y(-0.3, 0.3), T(-1.0, 3.0);
  Distortion d;
  d.n_curves = n_curves;
  d.seed = seed;
  std::vector<std::pair<double, double>> lens;
  for (int k = 0; k < n_curves; ++k) {
    Polyline3 c;
    for (int i = 0; i < 6; ++i) c.points.emplace_back(0.0, Y(rng), T(rng));
    const double lg = length(c, level), ls = length(c, solv);
    lens.emplace_back(ls, lg);
    d.max_ratio = std::max(d.max_ratio, ls / lg);
    d.min_ratio = std::min(d.min_ratio, ls / lg);
  }
  d.a0 = std::max({1.0, d.max_ratio, 1.0 / d.min_ratio});
  d.a1 = 0.0;
  for (const auto& [ls, lg] : lens) d.a1 = std::max({d.a1, ls - d.a0 * lg, lg / d.a0 - ls});
  return d;
}

nlohmann::json QGReport::to_json() const {
  nlohmann::json in = nlohmann::json::object();
  for (const auto& [k, v] : inputs) in[k] = {{"value", v.value}, {"source", v.source}};
  std::vector<double> res;
  for (const auto& r : rows) res.push_back(r.residual);
  std::sort(res.begin(), res.end());
  nlohmann::json q = nlohmann::json::object();
  if (!res.empty())
    q = {{"min", res.front()}, {"median", res[res.size() / 2]}, {"max", res.back()}};
  return {{"C", C},
          {"c", c},
          {"source", source},
          {"inputs", in},
          {"n_rows", rows.size()},
          {"violations", violations},
          {"violations_lower_bound", violations_lo},
          {"companion_residual_max", companion_residual_max},
          {"residual_quantiles", q},
          {"h", h},
          {"tol", tol},
          {"status", verified() ? "verified" : "failed"}};
}

std::string QGReport::csv_body() const {
  CsvWriter w({"sample", "u", "tau", "t_prime", "ell", "d_lo", "d_hi", "residual", "residual_lo", "h", "tol"});
  for (const auto& r : rows)
    w.row({std::to_string(r.sample), num(r.u), num(r.tau), num(r.t_prime), num(r.ell), num(r.d_lo), num(r.d_hi),
           num(r.residual), num(r.residual_lo), num(h), num(tol)});
  return w.body();
}

QGReport prop_key_scan(const PlugModel& plug, const BoundaryFoliationModel& fol, const MetricField& level,
                       const KeyScanOptions& opt) {
  if (!(opt.delta > 0)) throw Error(Errc::DomainError, "delta must be positive");
  if (opt.delta >= fol.diameter()) throw Error(Errc::BadRegionEmpty, "delta covers the whole boundary torus");
  struct Good {
    Vec3 b;
    double u, tau;
    Companion comp;
    double s1;
  };
  std::vector<Good> good;
  for (int i = 0; i < opt.n_u; ++i)
    for (int j = 0; j < opt.n_tau; ++j) {
      const double u = (i + 0.5) / opt.n_u, tau = (j + 0.5) / opt.n_tau;
      const Vec3 b = plug.boundary_point(u, tau);
      if (bad_region_test(fol, plug, b, opt.delta)) continue;
      const Companion cm = stable_companion(plug, b);
      // two competitors for d(b, bbar): the chord, and flow-then-level-segment (refined)
      Polyline3 p;
      p.points = {b, Vec3(b.x(), b.y(), cm.bbar.z()), cm.bbar};
      const double viaflow = length(refine_path(p, level), level);
      const double chord = segment_length(b, cm.bbar, level);
      good.push_back({b, u, tau, cm, std::min(viaflow, chord)});
    }
  if (good.empty()) throw Error(Errc::BadRegionEmpty, "no candidate sample lies outside the bad region");

  double S1 = 0.0;
  for (const auto& g : good) S1 = std::max(S1, g.s1);
  const double delta1 = 0.5 * S1;
  double S2 = 0.0;
  for (const auto& g : good) {
    const int n = int(std::lround(opt.s2_t_max / opt.s2_step));
    double first_ok = -1;
    for (int k = n; k >= 0; --k) {
      const double T = k * opt.s2_step;
      if (companion_gap(plug, level, g.b, g.comp, T) > delta1) break;
      first_ok = T;
    }
    if (first_ok < 0)
      throw Error(Errc::ThresholdNotFound, "companion gap stays above delta1 up to the scan limit");
    S2 = std::max(S2, first_ok + std::max(0.0, g.comp.s));
  }

  QGReport rep;
  rep.source = "composed";
  std::tie(rep.C, rep.c) = prop_key_constants(opt.K, opt.k, S1, S2);
  rep.inputs["K"] = {opt.K, "2 a0 from the yt-plane distortion corpus"};
  rep.inputs["k"] = {opt.k, "2 a1 + k' from the yt-plane verification"};
  rep.inputs["s1"] = {S1, "max over good samples of an upper bound on d(b, bbar)"};
  rep.inputs["s2"] = {S2, "max over good samples of the companion contraction time plus s"};
  rep.inputs["delta1"] = {delta1, "s1 / 2"};
  rep.inputs["delta"] = {opt.delta, "bad-region half-width (flat torus units)"};
  rep.inputs["n_good_samples"] = {double(good.size()), "candidate grid minus bad region"};

  double comp_max = -INFINITY;
  int id = 0;
  for (const auto& g : good) {
    for (double tp : opt.t_grid) {
      const Vec3 q = plug.flow(g.b, tp);
      const double ell = plug.ell(q);
      const DistanceResult D = dist_to_boundary(q, plug, level);
      KeyRow row{id, g.u, g.tau, tp, ell, D.lower_bound, D.upper_bound, ell - (rep.C * D.upper_bound + rep.c),
                 ell - (rep.C * D.lower_bound + rep.c)};
      if (row.residual > 0) ++rep.violations;
      if (row.residual_lo > 0) ++rep.violations_lo;
      rep.tol = std::max(rep.tol, D.upper_bound - D.lower_bound);
      rep.rows.push_back(row);
      // the companion orbit must satisfy the yt-plane inequality with (K, k)
      const double T = tp - g.comp.s;
      if (T > 0) {
        const Vec3 qb = fwq::flow(g.comp.bbar, T);
        const double Db = yt_tube_distance(qb, plug, 0.02).upper;
        const double rb = plug.ell(qb) - (opt.K * Db + opt.k);
        comp_max = std::max(comp_max, rb);
      }
    }
    ++id;
  }
  rep.companion_residual_max = std::isfinite(comp_max) ? comp_max : 0.0;
  return rep;
}

}  // namespace fwq
