#include "fwq/core_charts.hpp"

#include <cmath>
#include <string>

#include "fwq/errors.hpp"

namespace fwq {

namespace {

double smoothstep5(double v) { return v * v * v * (10.0 + v * (-15.0 + 6.0 * v)); }
double dsmoothstep5(double v) { return 30.0 * v * v * (1.0 - v) * (1.0 - v); }

Vec2 eigenvector(const IntMat2& m, double mu) {
  const double a = double(m[0][0]), b = double(m[0][1]);
  const double c = double(m[1][0]), d = double(m[1][1]);
  Vec2 v = (std::abs(b) > 0) ? Vec2(b, mu - a) : Vec2(mu - d, c);
  v.normalize();
  if (v.x() < 0 || (v.x() == 0 && v.y() < 0)) v = -v;
  return v;
}

}  // namespace

LatticeAutomorphism eigen_decompose(const IntMat2& m) {
  const long det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const long tr = m[0][0] + m[1][1];
  if (det != 1 || std::labs(tr) <= 2)
    throw Error(Errc::NonHyperbolic, "need det = 1 and |trace| > 2, got det = " + std::to_string(det) +
                                         ", trace = " + std::to_string(tr));
  if (tr < 0) throw Error(Errc::DomainError, "negative leading eigenvalue is not supported");
  LatticeAutomorphism a;
  a.m = m;
  const double t = double(tr);
  a.lambda = 0.5 * (t + std::sqrt(t * t - 4.0));
  a.v_unstable = eigenvector(m, a.lambda);
  a.v_stable = eigenvector(m, 1.0 / a.lambda);
  return a;
}

Chart Chart::from_automorphism(const LatticeAutomorphism& a) {
  Chart c;
  c.from_eigen.col(0) = a.v_stable;
  c.from_eigen.col(1) = a.v_unstable;
  c.to_eigen = c.from_eigen.inverse();
  return c;
}

double BlowupProfile::value(double r) const {
  if (r <= r1) return theta0;
  if (r >= r2) return 1.0;
  const double v = std::log(r / r1) / std::log(r2 / r1);
  return std::exp(std::log(theta0) * (1.0 - smoothstep5(v)));
}

double BlowupProfile::dvalue(double r) const {
  if (r <= r1 || r >= r2) return 0.0;
  const double lr = std::log(r2 / r1);
  const double v = std::log(r / r1) / lr;
  return -value(r) * std::log(theta0) * dsmoothstep5(v) / (r * lr);
}

double BlowupProfile::min_radial_slope() const {
  double best = std::min(theta0, 1.0);
  const int n = 4000;
  for (int i = 1; i < n; ++i) {
    const double r = r1 + (r2 - r1) * double(i) / n;
    best = std::min(best, value(r) + r * dvalue(r));
  }
  return best;
}

const char* mode_name(DAMode m) { return m == DAMode::source ? "source" : "sink"; }

DAMapModel::DAMapModel(const IntMat2& m, double r1, double r2, double theta0, DAMode mode)
    : aut_(eigen_decompose(m)), chart_(Chart::from_automorphism(aut_)), mode_(mode) {
  if (!(r1 > 0 && r1 < r2)) throw Error(Errc::Config, "blow-up radii need 0 < r1 < r2");
  if (!(theta0 >= 1)) throw Error(Errc::Config, "theta0 must be >= 1");
  prof_ = {r1, r2, theta0};
  log_lambda_ = std::log(aut_.lambda);
}

DAMapModel DAMapModel::default_model() {
  const IntMat2 m{{{2, 1}, {1, 1}}};
  const double lam = eigen_decompose(m).lambda;
  return DAMapModel(m, 0.025, 0.25, 1.2 * lam);
}

std::vector<std::string> DAMapModel::invariant_violations() const {
  std::vector<std::string> out;
  if (!(prof_.r1 > 0 && prof_.r1 < prof_.r2)) out.push_back("r1 < r2");
  if (mode_ == DAMode::source && !(prof_.theta0 > lambda()))
    out.push_back("theta0 > lambda (source condition)");
  double shortest = INFINITY;
  for (long i = -3; i <= 3; ++i)
    for (long j = -3; j <= 3; ++j)
      if (i || j) shortest = std::min(shortest, chart_.lattice(i, j).norm());
  if (!(2.0 * prof_.r2 < shortest)) out.push_back("lattice translates of D2 pairwise disjoint (2 r2 < shortest lattice vector)");
  if (!(prof_.min_radial_slope() > 0)) out.push_back("r -> r theta(r) strictly increasing (blow-up is a diffeomorphism)");
  return out;
}

LiftLocal DAMapModel::lift_local(const Vec2& p) const {
  const Vec2 e = chart_.from_eigen * p;
  const long i0 = std::lround(e.x()), j0 = std::lround(e.y());
  Vec2 c = chart_.lattice(i0, j0);
  Vec2 l = p - c;
  if (l.squaredNorm() < prof_.r2 * prof_.r2) return {c, l, true};
  // non-orthogonal charts: rounding may pick a lattice point other than the nearest
  for (long di = -1; di <= 1; ++di)
    for (long dj = -1; dj <= 1; ++dj) {
      if (!di && !dj) continue;
      const Vec2 c2 = chart_.lattice(i0 + di, j0 + dj);
      const Vec2 l2 = p - c2;
      if (l2.squaredNorm() < prof_.r2 * prof_.r2) return {c2, l2, true};
    }
  return {c, l, false};
}

double DAMapModel::theta(const Vec2& p) const {
  const LiftLocal ll = lift_local(p);
  return ll.inside ? prof_.value(ll.local.norm()) : 1.0;
}

Vec2 DAMapModel::nu(const Vec2& p, double s) const { return nu(p, s, nullptr); }

Vec2 DAMapModel::nu(const Vec2& p, double s, Mat2* jac) const {
  if (jac) jac->setIdentity();
  if (s == 0.0) return p;
  const LiftLocal ll = lift_local(p);
  if (!ll.inside) return p;
  const double r = ll.local.norm();
  const double th = prof_.value(r);
  const double ths = std::pow(th, s);
  const double lx = ll.local.x(), ly = ll.local.y();
  if (jac) {
    const double dth = prof_.dvalue(r);
    double gx = 0, gy = 0;
    if (r > 0 && dth != 0) {
      const double k = s * ths / th * dth / r;  // d(theta^s)/dr / r
      gx = k * lx;
      gy = k * ly;
    }
    (*jac)(0, 0) = ths + gx * lx;
    (*jac)(0, 1) = gy * lx;
    (*jac)(1, 0) = 0.0;
    (*jac)(1, 1) = 1.0;
  }
  return ll.center + Vec2(ths * lx, ly);
}

Vec2 DAMapModel::B(const Vec2& p, double s) const {
  const double f = std::exp(s * log_lambda_);
  return Vec2(p.x() / f, p.y() * f);
}

Vec2 DAMapModel::eta(const Vec2& p, double s) const { return eta(p, s, nullptr); }

Vec2 DAMapModel::eta(const Vec2& p, double s, Mat2* jac) const {
  const Vec2 v = nu(p, s, jac);
  if (jac) {
    const double f = std::exp(s * log_lambda_);
    jac->row(0) /= f;
    jac->row(1) *= f;
  }
  return B(v, s);
}

Vec2 DAMapModel::Phi(const Vec2& p) const { return eta(p, 1.0, nullptr); }
Vec2 DAMapModel::Phi(const Vec2& p, Mat2* jac) const { return eta(p, 1.0, jac); }

Vec2 DAMapModel::Phi_inv(const Vec2& p) const { return Phi_inv(p, nullptr); }

Vec2 DAMapModel::Phi_inv(const Vec2& p, Mat2* jac) const {
  const double lam = lambda();
  const Vec2 q(p.x() * lam, p.y() / lam);
  const LiftLocal ll = lift_local(q);
  Vec2 pre = q;
  if (ll.inside) {
    // solve theta(|(u, ly)|) u = lx; the left side is increasing in u and |u| <= |lx|
    const double lx = ll.local.x(), ly = ll.local.y();
    auto g = [&](double u) { return prof_.value(std::hypot(u, ly)) * u - lx; };
    double lo = std::min(0.0, lx), hi = std::max(0.0, lx);
    double u = lx / prof_.value(ll.local.norm());
    for (int it = 0; it < 200; ++it) {
      const double gu = g(u);
      if (gu == 0.0) break;
      if (gu > 0) hi = u; else lo = u;
      const double r = std::hypot(u, ly);
      const double d = prof_.value(r) + (r > 0 ? prof_.dvalue(r) * u * u / r : 0.0);
      double un = u - gu / d;
      if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
      if (std::abs(un - u) <= 1e-17 + 1e-16 * std::abs(u)) { u = un; break; }
      u = un;
    }
    pre = ll.center + Vec2(u, ly);
  }
  if (jac) {
    Mat2 jf;
    nu(pre, 1.0, &jf);
    Mat2 ainv = Mat2::Zero();
    ainv(0, 0) = lam;
    ainv(1, 1) = 1.0 / lam;
    *jac = jf.inverse() * ainv;
  }
  return pre;
}

Vec2 DAMapModel::Phi_iter(const Vec2& p, long n, Mat2* jac) const {
  Vec2 x = p;
  if (jac) jac->setIdentity();
  Mat2 step;
  for (long k = 0; k < std::labs(n); ++k) {
    x = (n > 0) ? Phi(x, jac ? &step : nullptr) : Phi_inv(x, jac ? &step : nullptr);
    if (jac) *jac = step * (*jac);
  }
  return x;
}

Vec3 DAMapModel::deck_apply(DeckGen g, const Vec3& q) const {
  const Vec2 p(q.x(), q.y());
  Vec2 r = p;
  double t = q.z();
  switch (g) {
    case DeckGen::Gamma: r = Phi(p); t -= 1.0; break;
    case DeckGen::GammaInv: r = Phi_inv(p); t += 1.0; break;
    case DeckGen::E1: r = p + chart_.lattice(1, 0); break;
    case DeckGen::E1Inv: r = p - chart_.lattice(1, 0); break;
    case DeckGen::E2: r = p + chart_.lattice(0, 1); break;
    case DeckGen::E2Inv: r = p - chart_.lattice(0, 1); break;
  }
  return Vec3(r.x(), r.y(), t);
}

Vec3 DAMapModel::deck_apply(const std::vector<DeckGen>& word, const Vec3& q) const {
  Vec3 r = q;
  for (auto it = word.rbegin(); it != word.rend(); ++it) r = deck_apply(*it, r);  // rightmost acts first
  return r;
}

std::pair<Vec2, Vec2> DAMapModel::fixed_points() const {
  if (mode_ != DAMode::source) throw Error(Errc::DomainError, "fixed points are defined for source mode");
  const double lam = lambda();
  if (!(prof_.theta0 > lam)) throw Error(Errc::NoRoot, "theta(x,0) = lambda has no root when theta0 <= lambda");
  double lo = prof_.r1, hi = prof_.r2;  // theta - lambda: positive at r1, negative at r2
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (prof_.value(mid) > lam) lo = mid; else hi = mid;
  }
  const double xs = 0.5 * (lo + hi);
  return {Vec2(xs, 0.0), Vec2(-xs, 0.0)};
}

nlohmann::json DAMapModel::to_json() const {
  return {{"matrix", {{aut_.m[0][0], aut_.m[0][1]}, {aut_.m[1][0], aut_.m[1][1]}}},
          {"r1", prof_.r1},
          {"r2", prof_.r2},
          {"theta0", prof_.theta0},
          {"mode", mode_name(mode_)}};
}

DAMapModel DAMapModel::from_json(const nlohmann::json& j) {
  IntMat2 m{};
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) m[i][k] = j.at("matrix").at(i).at(k).get<long>();
  const std::string mode = j.value("mode", "source");
  if (mode != "source" && mode != "sink") throw Error(Errc::Config, "mode must be source or sink");
  return DAMapModel(m, j.at("r1").get<double>(), j.at("r2").get<double>(), j.at("theta0").get<double>(),
                    mode == "source" ? DAMode::source : DAMode::sink);
}

}  // namespace fwq
