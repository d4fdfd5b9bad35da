#pragma once
// Gluing an attracting and a repelling plug along their boundary tori, the
// transversality check on the pushed boundary foliations, and certificates
// for orbits that cross the gluing torus.

#include <array>
#include <json.hpp>
#include <string>
#include <vector>

#include "fwq/plug_builder.hpp"

namespace fwq {

// Affine map of the torus parameter square (u, tau) -> M (u, tau) + shift, mod 1.
struct GluingMap {
  std::array<std::array<long, 2>, 2> M{{{1, 0}, {0, 1}}};
  Vec2 shift = Vec2::Zero();

  static GluingMap identity() { return {}; }
  // Quarter turn of the meridian: u -> u + 1/4.  This is the rotation of the
  // boundary circles that makes the two Reeb foliations cross.
  static GluingMap quarter_turn();
  // The literal linear rotation (u, tau) -> (-tau, u) of the parameter square.
  static GluingMap square_rotation();

  long det() const { return M[0][0] * M[1][1] - M[0][1] * M[1][0]; }
  Vec2 apply(const Vec2& ut) const;
  Vec2 apply_inverse(const Vec2& ut) const;
  Vec2 push(const Vec2& v) const;  // linear part on tangent vectors
  nlohmann::json to_json() const;
};

// Min over an n x n exit-torus grid of the unsigned angle between the pushed
// exit line field and the entrance line field.
double pushed_foliation_angle(const GluingMap& omega, const BoundaryFoliationModel& exit_fol,
                              const BoundaryFoliationModel& entrance_fol, int n = 128);

// True iff Omega(exit delta-neighbourhood) misses the entrance delta'-neighbourhood
// on the grid, with a half-cell-diagonal margin on both sides.
bool delta_disjointness(const GluingMap& omega, const BoundaryFoliationModel& exit_fol,
                        const BoundaryFoliationModel& entrance_fol, double delta, double delta_prime, int n = 256);

struct Pairing {
  int exit_plug, exit_component;
  int entrance_plug, entrance_component;
  GluingMap omega;
};

class GluedManifoldModel {
 public:
  GluedManifoldModel(std::vector<PlugModel> plugs, std::vector<Pairing> pairings);
  // One attracting plug glued to its time reversal by the quarter turn.
  static GluedManifoldModel franks_williams(const PlugModel& attracting, const GluingMap& omega);

  const std::vector<PlugModel>& plugs() const { return plugs_; }
  const std::vector<Pairing>& pairings() const { return pairings_; }
  // Each plug has one boundary torus; this lists (exit plug, entrance plug) edges.
  std::vector<std::pair<int, int>> adjacency() const;
  std::vector<std::string> invariant_violations() const;
  nlohmann::json to_json() const;

 private:
  std::vector<PlugModel> plugs_;
  std::vector<Pairing> pairings_;
};

struct CrossConstants {
  double C1 = 0.0, c1 = 0.0;  // one-sided escape constants
  double a3 = 1.0, a4 = 0.0;  // flow segments inside one plug
  double eps = 1.0;           // collar crossing length
  double delta = 0.05, delta_prime = 0.05;
};

struct CrossCertificate {
  int id = 0;
  double u = 0.0, tau = 0.0;  // crossing point on the entrance torus
  double t_minus = 0.0, t_plus = 0.0;
  int case_no = 1;  // 1: the forward piece is at least as long as the backward one
  double length = 0.0, d_lo = 0.0, d_hi = 0.0;
  double C0 = 0.0, c0 = 0.0;
  bool attracting_side_good = true, repelling_side_good = true;
  bool pass() const { return length <= C0 * d_lo + c0 && d_lo <= d_hi; }
};

// Crossing at entrance-torus parameter b = (u, tau) of the attracting plug,
// the orbit running t_minus back into the repelling plug and t_plus forward.
CrossCertificate cross_orbit_report(const GluedManifoldModel& glued, const Vec2& b, double t_minus, double t_plus,
                                    const CrossConstants& k, int id = 0);

// h is the lattice step behind the distances (0 when none is used), tol the length tolerance.
std::string certificates_csv_body(const std::vector<CrossCertificate>& certs, double h, double tol);

}  // namespace fwq
