#pragma once
// Eigen coordinates, the toral automorphism, the blow-up family and the
// lifted DA map.  Eigen coordinates are (x, y) with x along the stable
// eigenvector (eigenvalue 1/lambda) and y along the unstable one.

#include <Eigen/Dense>
#include <array>
#include <json.hpp>
#include <vector>

namespace fwq {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using IntMat2 = std::array<std::array<long, 2>, 2>;

struct LatticeAutomorphism {
  IntMat2 m{};
  double lambda = 0.0;
  Vec2 v_unstable = Vec2::Zero();
  Vec2 v_stable = Vec2::Zero();
};

// Throws NonHyperbolic unless det = 1 and |trace| > 2.
LatticeAutomorphism eigen_decompose(const IntMat2& m);

struct Chart {
  Mat2 to_eigen = Mat2::Identity();
  Mat2 from_eigen = Mat2::Identity();

  static Chart from_automorphism(const LatticeAutomorphism& a);
  Vec2 lattice(long i, long j) const { return to_eigen * Vec2(double(i), double(j)); }
};

// Radial bump: theta = theta0 on |p| <= r1, 1 on |p| >= r2, and between them
// log(theta) is a quintic smoothstep in the log-radius v = log(r/r1)/log(r2/r1).
// C2 at both ends.  x -> theta(x) x stays monotone as long as
// (15/8) log(theta0) < log(r2/r1).
struct BlowupProfile {
  double r1 = 0.025;
  double r2 = 0.25;
  double theta0 = 1.0;

  double value(double r) const;
  double dvalue(double r) const;  // d theta / dr
  double min_radial_slope() const;  // min over r of d(r theta)/dr, sampled
};

enum class DAMode { source, sink };

struct LiftLocal {
  Vec2 center;  // lattice lift of the origin nearest to p
  Vec2 local;   // p - center
  bool inside;  // |local| < r2
};

enum class DeckGen { Gamma, GammaInv, E1, E1Inv, E2, E2Inv };

class DAMapModel {
 public:
  DAMapModel() = default;
  DAMapModel(const IntMat2& m, double r1, double r2, double theta0, DAMode mode = DAMode::source);

  static DAMapModel default_model();  // m = [[2,1],[1,1]], r1 = 0.025, r2 = 0.25, theta0 = 1.2 lambda

  const LatticeAutomorphism& automorphism() const { return aut_; }
  const Chart& chart() const { return chart_; }
  const BlowupProfile& profile() const { return prof_; }
  DAMode mode() const { return mode_; }
  double lambda() const { return aut_.lambda; }

  // Empty when every invariant holds; otherwise one message per violation.
  std::vector<std::string> invariant_violations() const;

  LiftLocal lift_local(const Vec2& p) const;

  double theta(const Vec2& p) const;
  Vec2 nu(const Vec2& p, double s) const;
  Vec2 nu(const Vec2& p, double s, Mat2* jac) const;
  Vec2 B(const Vec2& p, double s) const;
  Vec2 eta(const Vec2& p, double s) const;
  Vec2 eta(const Vec2& p, double s, Mat2* jac) const;
  Vec2 Phi(const Vec2& p) const;
  Vec2 Phi(const Vec2& p, Mat2* jac) const;
  Vec2 Phi_inv(const Vec2& p) const;
  Vec2 Phi_inv(const Vec2& p, Mat2* jac) const;
  // n-th iterate (negative n uses the inverse); jac accumulates D Phi^n.
  Vec2 Phi_iter(const Vec2& p, long n, Mat2* jac = nullptr) const;

  Vec3 deck_apply(DeckGen g, const Vec3& q) const;
  Vec3 deck_apply(const std::vector<DeckGen>& word, const Vec3& q) const;

  // (+x*, 0) and (-x*, 0) with theta(x*, 0) = lambda.  NoRoot if theta0 <= lambda.
  std::pair<Vec2, Vec2> fixed_points() const;

  nlohmann::json to_json() const;
  static DAMapModel from_json(const nlohmann::json& j);

 private:
  LatticeAutomorphism aut_;
  Chart chart_;
  BlowupProfile prof_;
  DAMode mode_ = DAMode::source;
  double log_lambda_ = 0.0;
};

// Free-function spellings used by the tests and the CLI.
inline double theta(const Vec2& p, const DAMapModel& m) { return m.theta(p); }
inline Vec2 nu_s(const DAMapModel& m, const Vec2& p, double s) { return m.nu(p, s); }
inline Vec2 B_s(const DAMapModel& m, const Vec2& p, double s) { return m.B(p, s); }
inline Vec2 eta_s(const DAMapModel& m, const Vec2& p, double s) { return m.eta(p, s); }
inline Vec2 Phi_lift(const DAMapModel& m, const Vec2& p) { return m.Phi(p); }
inline std::pair<Vec2, Vec2> da_fixed_points(const DAMapModel& m) { return m.fixed_points(); }

const char* mode_name(DAMode m);

}  // namespace fwq
