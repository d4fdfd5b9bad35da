#include "fwq/metric_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "fwq/artifacts.hpp"
#include "fwq/errors.hpp"
#include "fwq/simd.hpp"

namespace fwq {

MetricField MetricField::solv(double lambda) {
  if (!(lambda > 1)) throw Error(Errc::DomainError, "Solv metric needs lambda > 1");
  MetricField m;
  m.kind_ = MetricKind::solv;
  m.lambda_ = lambda;
  m.log_lambda_ = std::log(lambda);
  return m;
}

MetricField MetricField::level(std::shared_ptr<const DAMapModel> da) {
  MetricField m = solv(da->lambda());
  m.kind_ = MetricKind::level;
  m.da_ = std::move(da);
  return m;
}

MetricField MetricField::h_pullback(std::shared_ptr<const DAMapModel> da) {
  MetricField m = level(std::move(da));
  m.kind_ = MetricKind::h_pullback;
  return m;
}

Mat3 MetricField::tensor_at(const Vec3& q) const {
  Mat3 G = Mat3::Zero();
  const double t = q.z();
  if (kind_ == MetricKind::solv) {
    const double e = std::exp(2.0 * t * log_lambda_);
    G(0, 0) = 1.0 / e;
    G(1, 1) = e;
    G(2, 2) = 1.0;
    return G;
  }
  const double fl = std::floor(t);
  const long n = long(fl);
  const double s = t - fl;
  Mat2 M, Je;
  const Vec2 P = da_->Phi_iter(Vec2(q.x(), q.y()), n, &M);
  da_->eta(P, s, &Je);
  const Mat2 J = Je * M;
  G.topLeftCorner<2, 2>() = J.transpose() * J;
  G(2, 2) = 1.0;
  if (kind_ == MetricKind::h_pullback && s > 0) {
    // t-derivative of H(x, y, s) = (theta^s x, y, s), pushed through B_s
    const LiftLocal ll = da_->lift_local(P);
    if (ll.inside) {
      const double th = da_->profile().value(ll.local.norm());
      const Vec2 w(std::exp(-s * log_lambda_) * std::pow(th, s) * std::log(th) * ll.local.x(), 0.0);
      const Vec2 cross = J.transpose() * w;
      G(0, 2) = G(2, 0) = cross.x();
      G(1, 2) = G(2, 1) = cross.y();
      G(2, 2) = 1.0 + w.squaredNorm();
    }
  }
  return G;
}

double MetricField::norm(const Vec3& q, const Vec3& v) const {
  if (kind_ == MetricKind::solv) {
    const double e = std::exp(2.0 * q.z() * log_lambda_);
    return std::sqrt(v.x() * v.x() / e + e * v.y() * v.y() + v.z() * v.z());
  }
  return std::sqrt(std::max(0.0, v.dot(tensor_at(q) * v)));
}

bool MetricField::in_slab(const Vec3& q) const {
  if (kind_ == MetricKind::solv) return false;
  const double fl = std::floor(q.z());
  const long n = long(fl);
  const double s = q.z() - fl;
  Vec2 x(q.x(), q.y());
  for (long k = 0; k < std::labs(n); ++k) {
    if (n > 0) {
      if (da_->lift_local(x).inside) return true;
      x = da_->Phi(x);
    } else {
      x = da_->Phi_inv(x);
      if (da_->lift_local(x).inside) return true;
    }
  }
  return s > 0 && da_->lift_local(x).inside;
}

namespace {

// Midpoint rule with n panels on the straight segment a -> b.
double midpoint_sum(const Vec3& a, const Vec3& v, const MetricField& m, int n) {
  thread_local std::vector<double> t, vx, vy, vt, g, vv, out;
  out.resize(n);
  if (m.kind() == MetricKind::solv) {
    t.resize(n);
    vx.assign(n, v.x());
    vy.assign(n, v.y());
    vt.assign(n, v.z());
    for (int i = 0; i < n; ++i) t[i] = a.z() + (i + 0.5) / n * v.z();
    simd::solv_norms(m.log_lambda(), t.data(), vx.data(), vy.data(), vt.data(), out.data(), n);
  } else {
    g.resize(6 * std::size_t(n));
    vv.resize(3 * std::size_t(n));
    for (int i = 0; i < n; ++i) {
      const Mat3 G = m.tensor_at(a + (i + 0.5) / n * v);
      double* gi = g.data() + 6 * i;
      gi[0] = G(0, 0); gi[1] = G(0, 1); gi[2] = G(0, 2);
      gi[3] = G(1, 1); gi[4] = G(1, 2); gi[5] = G(2, 2);
      vv[3 * i] = v.x(); vv[3 * i + 1] = v.y(); vv[3 * i + 2] = v.z();
    }
    simd::quad_norms(g.data(), vv.data(), out.data(), n);
  }
  double s = 0;
  for (int i = 0; i < n; ++i) s += out[i];
  return s / n;
}

// Five-point Gauss-Legendre; the working objective during refinement.
double gl5_length(const Vec3& a, const Vec3& b, const MetricField& m) {
  static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  const Vec3 v = b - a;
  if (v.x() == 0 && v.y() == 0 && m.kind() != MetricKind::h_pullback) return std::abs(v.z());
  double s = 0;
  for (int i = 0; i < 5; ++i) s += ws[i] * m.norm(a + 0.5 * (xs[i] + 1.0) * v, v);
  return 0.5 * s;
}

}  // namespace

double segment_length(const Vec3& a, const Vec3& b, const MetricField& m, double rtol) {
  const Vec3 v = b - a;
  if (v.squaredNorm() == 0) return 0.0;
  // unit flow norm and orthogonality make vertical segments exact
  if (v.x() == 0 && v.y() == 0 && m.kind() != MetricKind::h_pullback) return std::abs(v.z());
  int n = 8;
  double prev = midpoint_sum(a, v, m, n);
  while (n < (1 << 15)) {
    n *= 2;
    const double cur = midpoint_sum(a, v, m, n);
    if (std::abs(cur - prev) <= rtol * cur) return cur;
    prev = cur;
  }
  return prev;
}

double length(const Polyline3& path, const MetricField& m, double rtol) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < path.points.size(); ++i) s += segment_length(path.points[i], path.points[i + 1], m, rtol);
  return s;
}

nlohmann::json to_json(const DistanceResult& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& p : r.witness.points) w.push_back({p.x(), p.y(), p.z()});
  return {{"value", r.value},     {"lower_bound", r.lower_bound}, {"upper_bound", r.upper_bound},
          {"h", r.grid_h},        {"graph_value", r.graph_value}, {"kappa", r.kappa},
          {"chart", r.witness.chart}, {"witness", w}};
}

// ---------------------------------------------------------------- refinement

namespace {

std::vector<Vec3> resample_indices(const std::vector<Vec3>& pts, std::size_t k) {
  std::vector<Vec3> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < k; ++i) out.push_back(pts[(i * (n - 1) + (k - 1) / 2) / (k - 1)]);
  out.front() = pts.front();
  out.back() = pts.back();
  return out;
}

std::vector<Vec3> subdivide(const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    out.push_back(pts[i]);
    out.push_back(0.5 * (pts[i] + pts[i + 1]));
  }
  out.push_back(pts.back());
  return out;
}

struct Descent {
  const MetricField& m;
  const RefineOptions& opt;
  std::vector<Vec3>& P;
  Vec2 end_param;  // only used with a sliding end
  std::vector<double> seg;

  double total() const {
    double s = 0;
    for (double v : seg) s += v;
    return s;
  }

  void run() {
    const std::size_t N = P.size();
    seg.resize(N - 1);
    for (std::size_t i = 0; i + 1 < N; ++i) seg[i] = gl5_length(P[i], P[i + 1], m);
    const bool slide = opt.end_surface != nullptr;
    std::vector<std::array<double, 3>> alpha(N);
    for (std::size_t i = 1; i < N; ++i) {
      const double base = 0.25 * (i + 1 < N ? 0.5 * (seg[i - 1] + seg[i]) : seg[i - 1]);
      alpha[i] = {base, base, base};
    }
    if (slide) alpha[N - 1] = {0.02, std::max(alpha[N - 1][1], 1e-3), 0.0};
    int quiet = 0;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      const double before = total();
      for (std::size_t i = 1; i < N; ++i) {
        const bool is_end = (i == N - 1);
        if (is_end && !slide) break;
        const int ncoord = is_end ? 2 : 3;
        for (int c = 0; c < ncoord; ++c) {
          double step;
          if (is_end) {
            step = alpha[i][c];
          } else {
            const double gcc = m.tensor_at(P[i])(c, c);
            step = alpha[i][c] / std::sqrt(std::max(gcc, 1e-300));
          }
          if (!(step > 0) || !std::isfinite(step)) continue;
          bool moved = false;
          for (int sgn : {1, -1}) {
            Vec3 cand = P[i];
            Vec2 cpar = end_param;
            if (is_end) {
              cpar[c] += sgn * step;
              cand = opt.end_surface->point(cpar.x(), cpar.y());
            } else {
              cand[c] += sgn * step;
            }
            const double a = gl5_length(P[i - 1], cand, m);
            const double b = is_end ? 0.0 : gl5_length(cand, P[i + 1], m);
            const double old = seg[i - 1] + (is_end ? 0.0 : seg[i]);
            if (a + b < old) {
              P[i] = cand;
              if (is_end) end_param = cpar;
              seg[i - 1] = a;
              if (!is_end) seg[i] = b;
              moved = true;
              break;
            }
          }
          alpha[i][c] *= moved ? 1.5 : 0.5;
        }
      }
      const double after = total();
      if (before - after <= opt.rel_tol * before) {
        if (++quiet >= 3) break;
      } else {
        quiet = 0;
      }
    }
  }
};

}  // namespace

Polyline3 refine_path(const Polyline3& witness, const MetricField& m, const RefineOptions& opt) {
  if (witness.points.size() < 2) throw Error(Errc::DomainError, "polyline needs at least 2 points");
  const double L_in = length(witness, m);
  std::vector<Vec3> P = witness.points;
  const std::size_t first = std::min<std::size_t>(9, std::max<std::size_t>(opt.max_vertices, 3));
  if (P.size() > first) P = resample_indices(P, first);
  while (P.size() < first) P = subdivide(P);
  Vec2 end_param = opt.end_surface ? opt.end_surface->param(P.back()) : Vec2::Zero();
  if (opt.end_surface) P.back() = opt.end_surface->point(end_param.x(), end_param.y());
  for (;;) {
    Descent d{m, opt, P, end_param, {}};
    d.run();
    end_param = d.end_param;
    if (2 * P.size() - 1 > std::size_t(opt.max_vertices)) break;
    P = subdivide(P);
  }
  Polyline3 out{P, witness.chart};
  // A sliding end may leave the original endpoint; compare lengths only when both ends are fixed.
  if (!opt.end_surface && length(out, m) > L_in) return witness;
  return out;
}

// ---------------------------------------------------------------- yt plane

double yt_distance(const Vec3& p, const Vec3& q, double lambda) {
  const double L = std::log(lambda);
  const double wp = std::exp(-p.z() * L) / L, wq = std::exp(-q.z() * L) / L;
  const double dy = p.y() - q.y(), dw = wp - wq;
  const double z = (dy * dy + dw * dw) / (2.0 * wp * wq);
  return std::log1p(z + std::sqrt(z * (z + 2.0))) / L;  // acosh(1 + z)
}

Polyline3 yt_geodesic(const Vec3& p, const Vec3& q, double lambda, int n) {
  const double L = std::log(lambda);
  auto w_of = [&](double t) { return std::exp(-t * L) / L; };
  auto t_of = [&](double w) { return -std::log(w * L) / L; };
  Polyline3 out;
  const double wp = w_of(p.z()), wq = w_of(q.z());
  const double dy = q.y() - p.y();
  if (std::abs(dy) <= 1e-14 * (1.0 + std::abs(p.y()))) {
    for (int i = 0; i <= n; ++i) {
      const double f = double(i) / n;
      out.points.emplace_back(0.0, p.y() + f * dy, p.z() + f * (q.z() - p.z()));
    }
    return out;
  }
  const double c = (p.y() * p.y() + wp * wp - q.y() * q.y() - wq * wq) / (2.0 * (p.y() - q.y()));
  const double R = std::hypot(p.y() - c, wp);
  // arclength along the semicircle is log tan(phi/2)
  const double sp = std::log(std::tan(0.5 * std::atan2(wp, p.y() - c)));
  const double sq = std::log(std::tan(0.5 * std::atan2(wq, q.y() - c)));
  for (int i = 0; i <= n; ++i) {
    const double s = sp + (sq - sp) * double(i) / n;
    const double phi = 2.0 * std::atan(std::exp(s));
    out.points.emplace_back(0.0, c + R * std::cos(phi), t_of(R * std::sin(phi)));
  }
  out.points.front() = Vec3(0.0, p.y(), p.z());
  out.points.back() = Vec3(0.0, q.y(), q.z());
  return out;
}

// ---------------------------------------------------------------- isometries

Vec3 mu_a(const Vec3& q, double a, double lambda) {
  const double f = std::pow(lambda, a);
  return Vec3(f * q.x(), q.y() / f, q.z() + a);
}

double verify_isometry(const std::function<Vec3(const Vec3&)>& map, const MetricField& m, int n_samples,
                       std::uint64_t seed, const SampleBox& box) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  double worst = 0;
  for (int k = 0; k < n_samples; ++k) {
    Vec3 p;
    for (int c = 0; c < 3; ++c) p[c] = box.lo[c] + (box.hi[c] - box.lo[c]) * U(rng);
    Vec3 v(N(rng), N(rng), N(rng));
    v.normalize();
    const double eps = 1e-6;
    const Vec3 w = (map(p + eps * v) - map(p - eps * v)) / (2 * eps);
    const double a = v.dot(m.tensor_at(p) * v);
    const double b = w.dot(m.tensor_at(map(p)) * w);
    worst = std::max(worst, std::abs(a - b) / a);
  }
  return worst;
}

std::string distance_csv_body(const std::vector<DistanceRow>& rows) {
  CsvWriter csv({"query_id", "value", "lower", "upper", "h", "tol"});
  for (const auto& r : rows)
    csv.row({r.id, num(r.r.value), num(r.r.lower_bound), num(r.r.upper_bound), num(r.r.grid_h), num(r.r.kappa)});
  return csv.body();
}

}  // namespace fwq
