#include "fwq/gluing.hpp"

#include <algorithm>
#include <cmath>

#include "fwq/artifacts.hpp"
#include "fwq/errors.hpp"
#include "fwq/qg_analysis.hpp"

namespace fwq {

namespace {

double wrap01(double u) {
  u -= std::floor(u);
  return u >= 1.0 ? 0.0 : u;
}

// nearest representative of u2 to u1 on the circle
double unwrap_near(double u1, double u2) { return u2 - std::round(u2 - u1); }

// Path along the tube surface, straight in (u, t), measured in m.
double surface_path_length(const TubeModel& tube, const MetricField& m, Vec2 a, Vec2 b, int n = 64) {
  b.x() = unwrap_near(a.x(), b.x());
  Polyline3 p;
  for (int i = 0; i <= n; ++i) {
    const Vec2 s = a + (b - a) * (double(i) / n);
    p.points.push_back(tube.point(s.x(), s.y()));
  }
  return length(p, m);
}

}  // namespace

GluingMap GluingMap::quarter_turn() {
  GluingMap g;
  g.shift = Vec2(0.25, 0.0);
  return g;
}

GluingMap GluingMap::square_rotation() {
  GluingMap g;
  g.M = {{{0, -1}, {1, 0}}};
  return g;
}

Vec2 GluingMap::apply(const Vec2& ut) const {
  const Vec2 r = push(ut) + shift;
  return Vec2(wrap01(r.x()), wrap01(r.y()));
}

Vec2 GluingMap::apply_inverse(const Vec2& ut) const {
  const long d = det();
  if (d != 1 && d != -1) throw Error(Errc::Degenerate, "gluing matrix must have det +-1");
  const Vec2 w = ut - shift;
  // inverse of an integer unimodular matrix is the adjugate over det
  const Vec2 r(double(M[1][1] * d) * w.x() - double(M[0][1] * d) * w.y(),
               -double(M[1][0] * d) * w.x() + double(M[0][0] * d) * w.y());
  return Vec2(wrap01(r.x()), wrap01(r.y()));
}

Vec2 GluingMap::push(const Vec2& v) const {
  return Vec2(double(M[0][0]) * v.x() + double(M[0][1]) * v.y(), double(M[1][0]) * v.x() + double(M[1][1]) * v.y());
}

nlohmann::json GluingMap::to_json() const {
  return {{"matrix", {{M[0][0], M[0][1]}, {M[1][0], M[1][1]}}}, {"shift", {shift.x(), shift.y()}}, {"det", det()}};
}

double pushed_foliation_angle(const GluingMap& omega, const BoundaryFoliationModel& exit_fol,
                              const BoundaryFoliationModel& entrance_fol, int n) {
  if (n < 2) throw Error(Errc::DomainError, "angle grid needs n >= 2");
  double best = M_PI / 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 p((i + 0.5) / n, (j + 0.5) / n);
      const Vec2 v = omega.push(exit_fol.line_field(p.x(), p.y())).normalized();
      const Vec2 q = omega.apply(p);
      const Vec2 w = entrance_fol.line_field(q.x(), q.y());
      const double c = std::min(1.0, std::abs(v.dot(w)));
      best = std::min(best, std::acos(c));
    }
  return best;
}

bool delta_disjointness(const GluingMap& omega, const BoundaryFoliationModel& exit_fol,
                        const BoundaryFoliationModel& entrance_fol, double delta, double delta_prime, int n) {
  if (n < 2) throw Error(Errc::DomainError, "disjointness grid needs n >= 2");
  const double margin = 0.5 * std::sqrt(2.0) / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 p((i + 0.5) / n, (j + 0.5) / n);
      if (exit_fol.circle_distance(p.x(), p.y()) >= delta + margin) continue;
      const Vec2 q = omega.apply(p);
      if (entrance_fol.circle_distance(q.x(), q.y()) < delta_prime + margin) return false;
    }
  return true;
}

// ---------------------------------------------------------------- glued manifold

GluedManifoldModel::GluedManifoldModel(std::vector<PlugModel> plugs, std::vector<Pairing> pairings)
    : plugs_(std::move(plugs)), pairings_(std::move(pairings)) {
  const auto v = invariant_violations();
  if (!v.empty()) throw Error(Errc::Degenerate, "invalid gluing: " + v.front());
}

GluedManifoldModel GluedManifoldModel::franks_williams(const PlugModel& attracting, const GluingMap& omega) {
  if (attracting.mode() != PlugMode::attracting)
    throw Error(Errc::DomainError, "franks_williams expects the attracting plug");
  PlugModel rep(attracting.da_ptr(), attracting.tube().r_tube(), attracting.collar_thickness(), PlugMode::repelling);
  return GluedManifoldModel({attracting, rep}, {Pairing{1, 0, 0, 0, omega}});
}

std::vector<std::pair<int, int>> GluedManifoldModel::adjacency() const {
  std::vector<std::pair<int, int>> e;
  for (const auto& p : pairings_) e.emplace_back(p.exit_plug, p.entrance_plug);
  return e;
}

std::vector<std::string> GluedManifoldModel::invariant_violations() const {
  std::vector<std::string> v;
  const int n = int(plugs_.size());
  // every plug here has exactly one boundary torus: an entrance for attracting
  // plugs, an exit for repelling ones
  std::vector<int> used(n, 0);
  for (const auto& p : pairings_) {
    if (p.exit_plug < 0 || p.exit_plug >= n || p.entrance_plug < 0 || p.entrance_plug >= n) {
      v.push_back("pairing refers to a missing plug");
      continue;
    }
    if (p.exit_component != 0 || p.entrance_component != 0) v.push_back("boundary component index out of range");
    if (plugs_[p.exit_plug].mode() != PlugMode::repelling) v.push_back("exit side of a pairing is not repelling");
    if (plugs_[p.entrance_plug].mode() != PlugMode::attracting)
      v.push_back("entrance side of a pairing is not attracting");
    const long d = p.omega.det();
    if (d != 1 && d != -1) v.push_back("gluing matrix is not unimodular");
    ++used[p.exit_plug];
    ++used[p.entrance_plug];
  }
  for (int i = 0; i < n; ++i)
    if (used[i] != 1) v.push_back("plug " + std::to_string(i) + " boundary glued " + std::to_string(used[i]) + " times");
  for (const auto& pl : plugs_)
    for (const auto& s : pl.invariant_violations()) v.push_back(s);
  return v;
}

nlohmann::json GluedManifoldModel::to_json() const {
  nlohmann::json j;
  j["plugs"] = nlohmann::json::array();
  for (const auto& p : plugs_) j["plugs"].push_back(p.to_json());
  j["pairings"] = nlohmann::json::array();
  for (const auto& p : pairings_)
    j["pairings"].push_back({{"exit", {p.exit_plug, p.exit_component}},
                             {"entrance", {p.entrance_plug, p.entrance_component}},
                             {"omega", p.omega.to_json()}});
  j["adjacency"] = adjacency();
  return j;
}

// ---------------------------------------------------------------- crossing orbits

CrossCertificate cross_orbit_report(const GluedManifoldModel& glued, const Vec2& b, double t_minus, double t_plus,
                                    const CrossConstants& k, int id) {
  if (!(t_minus >= 0 && t_plus >= 0)) throw Error(Errc::DomainError, "crossing times must be nonnegative");
  if (glued.pairings().size() != 1) throw Error(Errc::DomainError, "crossing report handles one gluing torus");
  const Pairing& pr = glued.pairings().front();
  const PlugModel& A = glued.plugs()[pr.entrance_plug];
  const PlugModel& R = glued.plugs()[pr.exit_plug];
  const BoundaryFoliationModel fA(A, 128, 32), fR(R, 128, 32);
  const MetricField mA = MetricField::level(A.da_ptr()), mR = MetricField::level(R.da_ptr());

  CrossCertificate c;
  c.id = id;
  c.u = wrap01(b.x());
  c.tau = wrap01(b.y());
  c.t_minus = t_minus;
  c.t_plus = t_plus;
  const Vec2 bR = pr.omega.apply_inverse(Vec2(c.u, c.tau));
  c.attracting_side_good = !fA.bad(c.u, c.tau, k.delta_prime);
  c.repelling_side_good = !fR.bad(bR.x(), bR.y(), k.delta);
  if (!c.attracting_side_good && !c.repelling_side_good)
    throw Error(Errc::BadBothSides, "crossing point is bad on both sides of the gluing torus");

  // lift the gluing with tau kept as the template height, so both sides share t
  const Vec3 pA = A.boundary_point(c.u, c.tau);
  const Vec3 pR = R.boundary_point(bR.x(), c.tau);
  const Vec3 q = A.flow(pA, t_plus);     // forward into the attracting plug
  const Vec3 qp = R.flow(pR, -t_minus);  // backward into the repelling plug
  const DistanceResult dA = dist_to_boundary(q, A, mA);
  const DistanceResult dR = dist_to_boundary(qp, R, mR);

  c.length = t_minus + t_plus + 2.0 * k.eps;
  c.d_lo = std::max(dA.lower_bound, dR.lower_bound) + k.eps;

  // candidate crossing points z on the torus: b itself, and the feet of both
  // witnesses joined along the surface.  The feet can only be carried across
  // when the gluing is a pure translation of the parameter square.
  double via = t_plus + t_minus;
  const bool translation = pr.omega.M[0][0] == 1 && pr.omega.M[1][1] == 1 && pr.omega.M[0][1] == 0 &&
                           pr.omega.M[1][0] == 0 && pr.omega.shift.y() == 0.0;
  if (translation) {
    const Vec2 zA = A.tube().param(dA.witness.points.back());
    Vec2 zR = R.tube().param(dR.witness.points.back());
    zR.x() += pr.omega.shift.x();
    const Vec2 bt(c.u, c.tau);
    via = std::min(via, dA.upper_bound + surface_path_length(A.tube(), mA, zA, bt) + t_minus);
    via = std::min(via, t_plus + surface_path_length(A.tube(), mA, bt, zR) + dR.upper_bound);
    via = std::min(via, dA.upper_bound + surface_path_length(A.tube(), mA, zA, zR) + dR.upper_bound);
  }
  c.d_hi = via + 2.0 * k.eps;

  c.case_no = t_plus >= t_minus ? 1 : 2;
  const auto [C0, c0] = compose_constants(k.C1, k.c1, k.a3, k.a4);
  c.C0 = C0;
  c.c0 = c0;
  return c;
}

std::string certificates_csv_body(const std::vector<CrossCertificate>& certs, double h, double tol) {
  CsvWriter w({"crossing_id", "case", "u", "tau", "t_minus", "t_plus", "length", "d_lo", "d_hi", "C0", "c0", "pass",
               "h", "tol"});
  for (const auto& c : certs)
    w.row({std::to_string(c.id), c.case_no == 1 ? "I" : "II", num(c.u), num(c.tau), num(c.t_minus), num(c.t_plus),
           num(c.length), num(c.d_lo), num(c.d_hi), num(c.C0), num(c.c0), c.pass() ? "1" : "0", num(h), num(tol)});
  return w.body();
}

}  // namespace fwq
