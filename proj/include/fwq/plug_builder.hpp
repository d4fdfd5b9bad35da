#pragma once
// Suspension flow, the transverse tube around the t-axis, and the attracting
// plug obtained by removing it.  Everything lives in the universal cover
// R^2 x R of the mapping torus, in eigen coordinates.

#include <json.hpp>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "fwq/core_charts.hpp"
#include "fwq/metric_engine.hpp"

namespace fwq {

// Elliptic level curves gamma_t(u) = (A(t) cos 2 pi u, B(t) sin 2 pi u) with
// A(t) = r (lambda/theta0)^t and B(t) = r lambda^-t.  Inside D1 the DA map is
// linear, so Phi(gamma_t(u)) = gamma_{t-1}(u) exactly.  Valid for t >= t_min,
// where gamma_t still fits in D1.
class TubeModel : public Surface {
 public:
  TubeModel() = default;
  TubeModel(double r_tube, double lambda, double theta0, double t_min = -1.0);

  double r_tube() const { return r_; }
  double t_min() const { return t_min_; }
  double A(double t) const { return r_ * std::exp(t * la_); }
  double B(double t) const { return r_ * std::exp(-t * lb_); }
  // Per-axis blend weights: gamma_t = (1 - beta) gamma_0 + beta Phi^-1(gamma_0) on each axis.
  double beta_x(double t) const;
  double beta_y(double t) const;

  double gauge(const Vec3& q) const override;
  Vec3 point(double u, double t) const override;
  Vec2 param(const Vec3& q) const override;
  double gap(const Vec2& xy, double t) const;  // gauge - 1 on the vertical line over xy

  // Empty when shrinking, Gamma-compatibility and containment in D1 hold on samples.
  std::vector<std::string> invariant_violations(const DAMapModel& da, int n_u = 64, int n_t = 40) const;
  // max |Phi(gamma_t(u)) - gamma_{t-1}(u)| over samples; bounds the Hausdorff distance
  double gamma_residual(const DAMapModel& da, int n_u = 64, int n_t = 40) const;
  // min over samples of dg/dt on the boundary (transversality margin)
  double min_gap_slope(int n_u = 64, int n_t = 40) const;

 private:
  double r_ = 0.008, t_min_ = -1.0;
  double la_ = 0.0, lb_ = 0.0;  // log(lambda/theta0) and log(lambda)
  double cx_ = 1.0, cy_ = 1.0;  // one-step axis ratios
};

enum class PlugMode { attracting, repelling };
enum class Direction { forward, backward };
const char* plug_mode_name(PlugMode m);

struct BoundaryHit {
  Vec3 point;
  double dt;  // signed template time from the query to the hit
};

// A plug in template coordinates.  The repelling plug is the attracting
// template with time reversed: the same points, with physical time -t.
class PlugModel {
 public:
  PlugModel() = default;
  PlugModel(std::shared_ptr<const DAMapModel> da, double r_tube, double collar = 1.0,
            PlugMode mode = PlugMode::attracting);

  const DAMapModel& da() const { return *da_; }
  std::shared_ptr<const DAMapModel> da_ptr() const { return da_; }
  const TubeModel& tube() const { return tube_; }
  double collar_thickness() const { return collar_; }
  PlugMode mode() const { return mode_; }
  // Mode of the physical return map: source for attracting plugs, sink for repelling.
  DAMode return_map_mode() const { return mode_ == PlugMode::attracting ? DAMode::source : DAMode::sink; }
  std::vector<std::string> invariant_violations() const;

  Vec3 flow(const Vec3& q, double dt) const;  // physical time
  // Template-time boundary crossing on the vertical line through q, bisected to 1e-10 in t.
  std::optional<BoundaryHit> first_boundary_hit(const Vec3& q, Direction dir) const;
  // Flow length from q back to its entrance point (template-backward for both modes).
  double ell(const Vec3& q) const;
  Vec2 torus_param(const Vec3& b) const;  // (u, t mod 1)
  Vec3 boundary_point(double u, double t) const { return tube_.point(u, t); }

  nlohmann::json to_json() const;

 private:
  std::shared_ptr<const DAMapModel> da_;
  TubeModel tube_;
  double collar_ = 1.0;
  PlugMode mode_ = PlugMode::attracting;
};

Vec3 flow(const Vec3& q, double dt);  // the template suspension flow (x, y, t + dt)

// Distance from q to the lifted boundary, computed in all of R^2 x R.
// The upper bound is the shorter of the flow segment and a refined
// horizontal-then-yt witness; the lower bound comes from the yt projection.
DistanceResult dist_to_boundary(const Vec3& q, const PlugModel& plug, const MetricField& m);
// Closed-form yt-plane distance from (y, t) to the wedge |y| <= r lambda^-t.
double yt_wedge_distance(double y, double t, double r_tube, double lambda);
// The same quantity through the lattice solver; used as an independent check.
// Its lower bound is 0 unless h < r_tube.
DistanceResult dist_to_boundary_grid(const Vec3& q, const PlugModel& plug, const MetricField& m,
                                     const GridOptions& opt = {});

// C1 through p1 = (+x*, 0) sits at u = 0, C2 through p2 at u = 1/2.  Each is
// sampled over one fundamental domain t in [0, 1] by root finding on the stable line.
std::pair<Polyline3, Polyline3> boundary_circles(const PlugModel& plug, int n = 33);
// max |Gamma(c(t)) - c(t - 1)| over the samples of both circles
double circle_closure_residual(const PlugModel& plug, int n = 33);

// Trace of the weak-stable foliation on the boundary torus, in (u, tau) coordinates.
class BoundaryFoliationModel {
 public:
  BoundaryFoliationModel() = default;
  BoundaryFoliationModel(const PlugModel& plug, int n_u = 256, int n_tau = 64);

  // unit tangent of the leaf through (u, tau) in the flat (u, tau) square
  Vec2 line_field(double u, double tau) const;
  // flat (u, tau) distance to C1 u C2 from the mesh distance field
  double circle_distance(double u, double tau) const;
  bool bad(double u, double tau, double delta) const { return circle_distance(u, tau) < delta; }
  // parameter-square diameter; a delta at or above it leaves no good region
  double diameter() const { return std::sqrt(0.5); }
  // number of crossings of D1 u D2 (u = 1/4, 3/4) by the leaf through (u, t)
  int leaf_crossings(double u, double t, double span = 4.0) const;
  int n_u() const { return n_u_; }
  int n_tau() const { return n_tau_; }

 private:
  double log_lambda_ = 0.0;
  int n_u_ = 0, n_tau_ = 0;
  std::vector<double> field_;  // n_u x n_tau vertex distances
};

bool bad_region_test(const BoundaryFoliationModel& f, const PlugModel& plug, const Vec3& b, double delta);

struct Companion {
  Vec3 bbar;  // on D1 (y > 0) or D2 (y < 0)
  double s;   // t_bbar - t_b
};
// Throws OnCircle when b lies on C1 or C2.
Companion stable_companion(const PlugModel& plug, const Vec3& b);
// Horizontal distance between flow(b, t + s) and flow(bbar, t): Ĝ1 length of the level segment.
double companion_gap(const PlugModel& plug, const MetricField& m, const Vec3& b, const Companion& c, double t);

// Measured maximum collar-crossing length over n boundary orbits.
double collar_epsilon(const PlugModel& plug, int n_samples = 64);

}  // namespace fwq
