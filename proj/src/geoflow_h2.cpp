#include "fwq/geoflow_h2.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fwq/errors.hpp"

namespace fwq {

TangentPoint h2_geodesic(const Vec2& p, const Vec2& v0, double t) {
  if (!(p.y() > 0)) throw Error(Errc::DomainError, "base point must lie in the upper half-plane");
  if (v0.squaredNorm() == 0) throw Error(Errc::DomainError, "zero tangent vector");
  const Vec2 v = v0 * (p.y() / v0.norm());  // unit hyperbolic length
  if (v.x() == 0) {
    const double sg = v.y() > 0 ? 1.0 : -1.0;
    const double y = p.y() * std::exp(sg * t);
    return {Vec2(p.x(), y), Vec2(0.0, sg * y)};
  }
  // semicircle x = c + R tanh(s), y = R sech(s), with s the arclength
  const double c = p.x() + p.y() * v.y() / v.x();
  const double R = std::hypot(p.x() - c, p.y());
  const double sg = v.x() > 0 ? 1.0 : -1.0;
  const double s = std::atanh((p.x() - c) / R) + sg * t;
  const double th = std::tanh(s), sh = 1.0 / std::cosh(s);
  return {Vec2(c + R * th, R * sh), Vec2(sg * R * sh * sh, -sg * R * sh * th)};
}

TangentCurve geodesic_trajectory(const Vec2& p, const Vec2& v, double T, int n) {
  TangentCurve c;
  for (int i = 0; i <= n; ++i) {
    const double t = T * i / n;
    c.s.push_back(t);
    c.pts.push_back(h2_geodesic(p, v, t));
  }
  return c;
}

namespace {

template <class F>
double integrate(const TangentCurve& c, F integrand) {
  const std::size_t n = c.pts.size();
  if (n < 2) throw Error(Errc::DomainError, "tangent curve needs at least 2 samples");
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? i : i + 1;
    const double ds = c.s[b] - c.s[a];
    const Vec2 dp = (c.pts[b].p - c.pts[a].p) / ds;
    const Vec2 dv = (c.pts[b].v - c.pts[a].v) / ds;
    f[i] = integrand(c.pts[i], dp, dv);
  }
  double sum = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) sum += 0.5 * (f[i] + f[i + 1]) * (c.s[i + 1] - c.s[i]);
  return sum;
}

}  // namespace

double sasaki_length(const TangentCurve& c) {
  return integrate(c, [](const TangentPoint& tp, const Vec2& dp, const Vec2& dv) {
    const double y = tp.p.y();
    const Vec2& v = tp.v;
    // Christoffel symbols of dx^2 + dy^2 over y^2
    const Vec2 Dv(dv.x() - (dp.x() * v.y() + dp.y() * v.x()) / y, dv.y() + (dp.x() * v.x() - dp.y() * v.y()) / y);
    return std::sqrt(dp.squaredNorm() + Dv.squaredNorm()) / y;
  });
}

double base_length(const TangentCurve& c) {
  return integrate(c, [](const TangentPoint& tp, const Vec2& dp, const Vec2&) { return dp.norm() / tp.p.y(); });
}

nlohmann::json MinimalityReport::to_json() const {
  return {{"flow_length", flow_length},   {"zero_amplitude_gap", zero_amplitude_gap},
          {"amplitudes", amplitudes},     {"min_margin", min_margin},
          {"median_margin", median_margin}, {"n_competitors", n_competitors},
          {"violations", violations},     {"seed", seed}};
}

MinimalityReport verify_flowline_minimality(const Vec2& p, const Vec2& v, double T, int n_competitors,
                                            std::uint64_t seed, std::vector<double> amplitudes, int n_samples) {
  if (!(T > 0)) throw Error(Errc::DomainError, "T must be positive");
  const TangentCurve flow = geodesic_trajectory(p, v, T, n_samples);
  MinimalityReport rep;
  rep.flow_length = sasaki_length(flow);
  rep.amplitudes = amplitudes;
  rep.n_competitors = n_competitors;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_int_distribution<int> K(1, 3);

  auto perturbed = [&](double amp, const Vec2& db, const Vec2& dfib, int kb, int kf) {
    TangentCurve c = flow;
    for (std::size_t i = 0; i < c.pts.size(); ++i) {
      const double x = c.s[i] / T;
      const double y = c.pts[i].p.y();
      const double bb = std::sin(kb * M_PI * x), bf = std::sin(kf * M_PI * x);
      // scale by y so amplitudes are hyperbolic sizes
      c.pts[i].p += amp * bb * y * db;
      c.pts[i].v += amp * bf * y * dfib;
    }
    return c;
  };
  {
    const TangentCurve z = perturbed(0.0, Vec2(1, 0), Vec2(0, 1), 1, 1);
    rep.zero_amplitude_gap = std::abs(sasaki_length(z) - rep.flow_length);
  }
  for (double amp : amplitudes) {
    std::vector<double> margins;
    for (int k = 0; k < n_competitors; ++k) {
      const Vec2 db(N(rng), N(rng)), df(N(rng), N(rng));
      const int kb = K(rng), kf = K(rng);
      const double L = sasaki_length(perturbed(amp, db.normalized(), df.normalized(), kb, kf));
      margins.push_back(L - rep.flow_length);
      if (L < rep.flow_length) ++rep.violations;
    }
    std::sort(margins.begin(), margins.end());
    rep.min_margin.push_back(margins.empty() ? 0.0 : margins.front());
    rep.median_margin.push_back(margins.empty() ? 0.0 : margins[margins.size() / 2]);
  }
  return rep;
}

std::pair<double, double> transfer_constants(double eta1, double eta2, double eta3, double eta4) {
  if (!(eta1 > 0 && eta2 > 0 && eta3 > 0)) throw Error(Errc::DomainError, "eta1, eta2, eta3 must be positive");
  if (!(eta4 >= 0)) throw Error(Errc::DomainError, "eta4 must be nonnegative");
  return {eta1 * eta3 / eta2, eta1 * eta4 / eta2 + eta1};
}

}  // namespace fwq
