#include "fwq/plug_builder.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "fwq/errors.hpp"

namespace fwq {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

double wrap01(double u) {
  u -= std::floor(u);
  return u >= 1.0 ? 0.0 : u;
}
}  // namespace

// ---------------------------------------------------------------- tube

TubeModel::TubeModel(double r_tube, double lambda, double theta0, double t_min)
    : r_(r_tube), t_min_(t_min), la_(std::log(lambda / theta0)), lb_(std::log(lambda)),
      cx_(lambda / theta0), cy_(1.0 / lambda) {
  if (!(r_tube > 0)) throw Error(Errc::Config, "r_tube must be positive");
  if (!(theta0 > lambda)) throw Error(Errc::Config, "the tube needs theta0 > lambda (source at the origin)");
}

double TubeModel::beta_x(double t) const { return (1.0 - std::pow(cx_, t)) / (1.0 - cx_); }
double TubeModel::beta_y(double t) const { return (1.0 - std::pow(cy_, t)) / (1.0 - cy_); }

double TubeModel::gauge(const Vec3& q) const {
  return std::hypot(q.x() / A(q.z()), q.y() / B(q.z()));
}

Vec3 TubeModel::point(double u, double t) const {
  const double a = kTwoPi * u;
  return Vec3(A(t) * std::cos(a), B(t) * std::sin(a), t);
}

Vec2 TubeModel::param(const Vec3& q) const {
  const double a = std::atan2(q.y() / B(q.z()), q.x() / A(q.z()));
  return Vec2(wrap01(a / kTwoPi), q.z());
}

double TubeModel::gap(const Vec2& xy, double t) const { return gauge(Vec3(xy.x(), xy.y(), t)) - 1.0; }

double TubeModel::gamma_residual(const DAMapModel& da, int n_u, int n_t) const {
  double worst = 0;
  for (int j = 0; j <= n_t; ++j) {
    const double t = t_min_ + 1.0 + 2.0 * j / n_t;  // t - 1 stays in the valid range
    for (int i = 0; i < n_u; ++i) {
      const double u = double(i) / n_u;
      const Vec3 p = point(u, t);
      const Vec2 img = da.Phi(Vec2(p.x(), p.y()));
      const Vec3 target = point(u, t - 1.0);
      worst = std::max(worst, (img - Vec2(target.x(), target.y())).norm());
    }
  }
  return worst;
}

double TubeModel::min_gap_slope(int n_u, int n_t) const {
  double best = INFINITY;
  for (int j = 0; j <= n_t; ++j) {
    const double t = t_min_ + 3.0 * j / n_t;
    for (int i = 0; i < n_u; ++i) {
      const Vec3 p = point(double(i) / n_u, t);
      const Vec2 xy(p.x(), p.y());
      const double e = 1e-6;
      best = std::min(best, (gap(xy, t + e) - gap(xy, t - e)) / (2 * e));
    }
  }
  return best;
}

std::vector<std::string> TubeModel::invariant_violations(const DAMapModel& da, int n_u, int n_t) const {
  std::vector<std::string> out;
  bool shrink = true;
  for (int j = 0; j <= n_t && shrink; ++j) {
    const double t = t_min_ + 3.0 * j / n_t;
    for (int i = 0; i < n_u; ++i) {
      const Vec3 inner = point(double(i) / n_u, t + 0.05);
      if (!(gauge(Vec3(inner.x(), inner.y(), t)) < 1.0)) {
        shrink = false;
        break;
      }
    }
  }
  if (!shrink) out.push_back("level curves strictly shrinking");
  if (!(gamma_residual(da, n_u, n_t) < 1e-6)) out.push_back("Gamma-compatibility Phi(gamma_t) = gamma_{t-1}");
  if (!(std::max(A(t_min_), B(t_min_)) < da.profile().r1)) out.push_back("tube contained in the lifted D1 over t >= t_min");
  return out;
}

// ---------------------------------------------------------------- plug

const char* plug_mode_name(PlugMode m) { return m == PlugMode::attracting ? "attracting" : "repelling"; }

PlugModel::PlugModel(std::shared_ptr<const DAMapModel> da, double r_tube, double collar, PlugMode mode)
    : da_(std::move(da)), collar_(collar), mode_(mode) {
  if (da_->mode() != DAMode::source)
    throw Error(Errc::Config, "plugs are built on the source template; the repelling plug reverses its time");
  if (!(collar > 0)) throw Error(Errc::Config, "collar thickness must be positive");
  tube_ = TubeModel(r_tube, da_->lambda(), da_->profile().theta0);
}

std::vector<std::string> PlugModel::invariant_violations() const {
  auto out = da_->invariant_violations();
  for (auto& s : tube_.invariant_violations(*da_)) out.push_back(s);
  return out;
}

Vec3 flow(const Vec3& q, double dt) { return Vec3(q.x(), q.y(), q.z() + dt); }

Vec3 PlugModel::flow(const Vec3& q, double dt) const {
  return fwq::flow(q, mode_ == PlugMode::attracting ? dt : -dt);
}

std::optional<BoundaryHit> PlugModel::first_boundary_hit(const Vec3& q, Direction dir) const {
  const Vec2 xy(q.x(), q.y());
  const double g0 = tube_.gap(xy, q.z());
  if (g0 == 0.0) return BoundaryHit{q, 0.0};
  double lo, hi;  // gap(lo) < 0 < gap(hi)
  if (dir == Direction::backward) {
    if (g0 < 0) return std::nullopt;  // inside, and the tube only widens backward
    lo = tube_.t_min();
    if (q.z() < lo || tube_.gap(xy, lo) > 0) return std::nullopt;
    hi = q.z();
  } else {
    if (g0 > 0) return std::nullopt;
    if (xy.squaredNorm() == 0) return std::nullopt;  // the core orbit stays inside
    lo = q.z();
    double step = 1.0;
    hi = lo + step;
    while (tube_.gap(xy, hi) <= 0) {
      step *= 2;
      hi = lo + step;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tube_.gap(xy, mid) > 0) hi = mid; else lo = mid;
  }
  const double th = 0.5 * (lo + hi);
  return BoundaryHit{Vec3(q.x(), q.y(), th), th - q.z()};
}

double PlugModel::ell(const Vec3& q) const {
  const auto hit = first_boundary_hit(q, Direction::backward);
  if (!hit) throw Error(Errc::NoIntersection, "orbit does not meet the tube boundary");
  return std::abs(hit->dt);
}

Vec2 PlugModel::torus_param(const Vec3& b) const {
  const Vec2 p = tube_.param(b);
  return Vec2(p.x(), wrap01(p.y()));
}

nlohmann::json PlugModel::to_json() const {
  const double lam = da_->lambda(), th0 = da_->profile().theta0;
  return {{"da", da_->to_json()},
          {"r_tube", tube_.r_tube()},
          {"t_min", tube_.t_min()},
          {"beta", {{"ratio_x", lam / th0}, {"ratio_y", 1.0 / lam}, {"form", "(1 - ratio^t) / (1 - ratio)"}}},
          {"collar_thickness", collar_},
          {"mode", plug_mode_name(mode_)}};
}

// ---------------------------------------------------------------- distances

double yt_wedge_distance(double y, double t, double r_tube, double lambda) {
  const double L = std::log(lambda);
  const double d = std::asinh(std::abs(y) * L * std::exp(t * L)) - std::asinh(r_tube * L);
  return std::max(0.0, d) / L;
}

namespace {

// Witness from q: a level x-move, then the yt geodesic to the perpendicular foot on the wedge.
Polyline3 boundary_witness(const Vec3& q, const TubeModel& tube, double lambda) {
  Polyline3 w;
  const double Bq = tube.B(q.z());
  if (std::abs(q.y()) <= Bq) {
    const double xh = std::copysign(tube.A(q.z()) * std::sqrt(1.0 - (q.y() / Bq) * (q.y() / Bq)), q.x());
    w.points = {q, Vec3(xh, q.y(), q.z())};
    return w;
  }
  const Vec3 a(0.0, q.y(), q.z());
  const double L = std::log(lambda);
  const double k = tube.r_tube() * L;
  const double wq = std::exp(-q.z() * L) / L;
  const double rho = std::hypot(q.y(), wq);
  const double wf = rho / std::sqrt(1.0 + k * k);
  double tf = -std::log(wf * L) / L;
  tf = std::max(tf, tube.t_min());
  const Vec3 foot(0.0, std::copysign(tube.B(tf), q.y()), tf);
  const Polyline3 g = yt_geodesic(a, foot, lambda, 32);
  if (q.x() != 0) w.points.push_back(q);
  for (const auto& p : g.points) w.points.push_back(p);
  return w;
}

}  // namespace

DistanceResult dist_to_boundary(const Vec3& q, const PlugModel& plug, const MetricField& m) {
  const TubeModel& tube = plug.tube();
  DistanceResult r;
  r.kappa = 0.0;
  if (tube.gauge(q) <= 1.0) {
    r.witness.points = {q, q};
    return r;
  }
  const double lam = plug.da().lambda();
  const double lower = std::min(yt_wedge_distance(q.y(), q.z(), tube.r_tube(), lam), q.z() - tube.t_min());

  Polyline3 best;
  double best_len = INFINITY;
  if (const auto hit = plug.first_boundary_hit(q, Direction::backward)) {
    best.points = {q, hit->point};
    best_len = std::abs(hit->dt);
  }
  Polyline3 w = boundary_witness(q, tube, lam);
  RefineOptions ro;
  ro.end_surface = &tube;
  ro.max_sweeps = 200;
  w = refine_path(w, m, ro);
  const double lw = length(w, m);
  if (lw < best_len) {
    best = w;
    best_len = lw;
  }
  r.witness = best;
  r.value = r.upper_bound = best_len;
  r.lower_bound = std::min(lower, best_len);
  return r;
}

DistanceResult dist_to_boundary_grid(const Vec3& q, const PlugModel& plug, const MetricField& m,
                                     const GridOptions& opt) {
  const TubeModel& tube = plug.tube();
  const double lam = plug.da().lambda();
  GridOptions o = opt;
  if (!o.heuristic)
    o.heuristic = [&tube, lam](const Vec3& a) {
      return 0.999 * std::min(yt_wedge_distance(a.y(), a.z(), tube.r_tube(), lam), std::max(0.0, a.z() - tube.t_min()));
    };
  auto prev = o.excluded;
  const double tmin = tube.t_min();
  o.excluded = [prev, tmin](const Vec3& a) { return a.z() < tmin || (prev && prev(a)); };
  DistanceResult r = point_to_surface_distance(q, tube, m, o);
  // The tube is r_tube thick in metric units at every level, so a lattice with
  // h > r_tube cannot resolve it and the kappa-based lower bound means nothing.
  if (tube.r_tube() < o.h) r.lower_bound = 0.0;
  return r;
}

// ---------------------------------------------------------------- circles

std::pair<Polyline3, Polyline3> boundary_circles(const PlugModel& plug, int n) {
  const TubeModel& tube = plug.tube();
  const double r2 = plug.da().profile().r2;
  Polyline3 c1, c2;
  for (int j = 0; j < n; ++j) {
    const double t = double(j) / (n - 1);
    // the stable line through p_i at this level is {y = 0} on p_i's side
    double lo = 0.0, hi = r2;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (tube.gap(Vec2(mid, 0.0), t) < 0) lo = mid; else hi = mid;
    }
    const double x = 0.5 * (lo + hi);
    c1.points.emplace_back(x, 0.0, t);
    c2.points.emplace_back(-x, 0.0, t);
  }
  return {c1, c2};
}

double circle_closure_residual(const PlugModel& plug, int n) {
  const auto [c1, c2] = boundary_circles(plug, n);
  const auto& tube = plug.tube();
  double worst = 0;
  for (const auto* c : {&c1, &c2})
    for (const auto& p : c->points) {
      const Vec3 g = plug.da().deck_apply(DeckGen::Gamma, p);
      const Vec3 target(std::copysign(tube.A(g.z()), p.x()), 0.0, g.z());
      worst = std::max(worst, (g - target).norm());
    }
  return worst;
}

// ---------------------------------------------------------------- boundary foliation

BoundaryFoliationModel::BoundaryFoliationModel(const PlugModel& plug, int n_u, int n_tau)
    : log_lambda_(std::log(plug.da().lambda())), n_u_(n_u), n_tau_(n_tau) {
  if (n_u % 2 != 0 || n_u < 8 || n_tau < 4) throw Error(Errc::DomainError, "mesh needs an even n_u >= 8 and n_tau >= 4");
  // Dijkstra on the periodic 8-neighbour mesh from the vertex columns of C1 and C2.
  const double du = 1.0 / n_u, dt = 1.0 / n_tau;
  field_.assign(std::size_t(n_u) * n_tau, INFINITY);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  for (int j = 0; j < n_tau; ++j)
    for (int i : {0, n_u / 2}) {
      field_[std::size_t(i) * n_tau + j] = 0.0;
      pq.push({0.0, i * n_tau + j});
    }
  while (!pq.empty()) {
    const auto [d, id] = pq.top();
    pq.pop();
    if (d > field_[id]) continue;
    const int i = id / n_tau, j = id % n_tau;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        if (!a && !b) continue;
        const int ii = (i + a + n_u) % n_u, jj = (j + b + n_tau) % n_tau;
        const double nd = d + std::hypot(a * du, b * dt);
        const int nid = ii * n_tau + jj;
        if (nd < field_[nid]) {
          field_[nid] = nd;
          pq.push({nd, nid});
        }
      }
  }
}

Vec2 BoundaryFoliationModel::line_field(double u, double) const {
  const double a = kTwoPi * u;
  Vec2 v(log_lambda_ * std::sin(a), kTwoPi * std::cos(a));
  return v.normalized();
}

double BoundaryFoliationModel::circle_distance(double u, double tau) const {
  const double fu = wrap01(u) * n_u_, ft = wrap01(tau) * n_tau_;
  const int i0 = int(fu) % n_u_, j0 = int(ft) % n_tau_;
  const int i1 = (i0 + 1) % n_u_, j1 = (j0 + 1) % n_tau_;
  const double a = fu - std::floor(fu), b = ft - std::floor(ft);
  auto F = [&](int i, int j) { return field_[std::size_t(i) * n_tau_ + j]; };
  return (1 - a) * (1 - b) * F(i0, j0) + a * (1 - b) * F(i1, j0) + (1 - a) * b * F(i0, j1) + a * b * F(i1, j1);
}

int BoundaryFoliationModel::leaf_crossings(double u, double t, double span) const {
  // RK4 along the unit line field in the universal cover, both orientations,
  // until the leaf has dropped span below its start.
  int crossings = 0;
  const double h = 1e-3;
  for (int sgn : {1, -1}) {
    Vec2 p(u, t), dir = sgn * line_field(u, t);
    auto field = [&](const Vec2& x, const Vec2& prev) {
      Vec2 v = line_field(x.x(), x.y());
      return v.dot(prev) < 0 ? Vec2(-v) : v;
    };
    for (int step = 0; step < 200000; ++step) {
      const Vec2 k1 = field(p, dir);
      const Vec2 k2 = field(p + 0.5 * h * k1, k1);
      const Vec2 k3 = field(p + 0.5 * h * k2, k2);
      const Vec2 k4 = field(p + h * k3, k3);
      const Vec2 np = p + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (std::cos(kTwoPi * p.x()) * std::cos(kTwoPi * np.x()) < 0) ++crossings;
      dir = (np - p).normalized();
      p = np;
      if (p.y() < t - span) break;
    }
  }
  return crossings;
}

bool bad_region_test(const BoundaryFoliationModel& f, const PlugModel& plug, const Vec3& b, double delta) {
  const Vec2 tp = plug.torus_param(b);
  return f.bad(tp.x(), tp.y(), delta);
}

// ---------------------------------------------------------------- companions and collar

Companion stable_companion(const PlugModel& plug, const Vec3& b) {
  const TubeModel& tube = plug.tube();
  if (std::abs(b.y()) <= 1e-12 * tube.B(b.z()))
    throw Error(Errc::OnCircle, "point lies on a circle leaf; its leaf never reaches the yt-plane");
  const double tbar = std::log(tube.r_tube() / std::abs(b.y())) / std::log(plug.da().lambda());
  return {Vec3(0.0, b.y(), tbar), tbar - b.z()};
}

double companion_gap(const PlugModel&, const MetricField& m, const Vec3& b, const Companion& c, double t) {
  const double T = c.bbar.z() + t;
  return segment_length(Vec3(b.x(), b.y(), T), Vec3(0.0, b.y(), T), m);
}

double collar_epsilon(const PlugModel& plug, int n_samples) {
  const MetricField m = MetricField::level(plug.da_ptr());
  double worst = 0;
  for (int i = 0; i < n_samples; ++i) {
    const Vec3 b = plug.boundary_point((i + 0.5) / n_samples, double(i % 8) / 8.0);
    worst = std::max(worst, segment_length(b, plug.flow(b, -plug.collar_thickness()), m));
  }
  return worst;
}

}  // namespace fwq
