#pragma once
// Solv and level-pullback metrics on R^2 x R, curve lengths, and numerical
// distances.  Points are (x, y, t) in eigen coordinates plus height.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fwq/core_charts.hpp"

namespace fwq {

enum class MetricKind { solv, level, h_pullback };

class MetricField {
 public:
  static MetricField solv(double lambda);
  static MetricField level(std::shared_ptr<const DAMapModel> da);
  static MetricField h_pullback(std::shared_ptr<const DAMapModel> da);

  MetricKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double log_lambda() const { return log_lambda_; }
  const DAMapModel* da() const { return da_.get(); }
  std::shared_ptr<const DAMapModel> da_ptr() const { return da_; }

  Mat3 tensor_at(const Vec3& q) const;
  double norm(const Vec3& q, const Vec3& v) const;
  // True when some map in the deck normalization of q's level touches a lifted D2,
  // i.e. where the level metric may differ from Solv.
  bool in_slab(const Vec3& q) const;

 private:
  MetricKind kind_ = MetricKind::solv;
  double lambda_ = 0.0, log_lambda_ = 0.0;
  std::shared_ptr<const DAMapModel> da_;
};

inline Mat3 tensor_at(const MetricField& m, const Vec3& q) { return m.tensor_at(q); }

struct Polyline3 {
  std::vector<Vec3> points;
  std::string chart = "eigen";
};

double segment_length(const Vec3& a, const Vec3& b, const MetricField& m, double rtol = 1e-6);
double length(const Polyline3& path, const MetricField& m, double rtol = 1e-6);

struct DistanceResult {
  double value = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  Polyline3 witness;
  double grid_h = 0.0;
  double graph_value = 0.0;  // raw lattice-graph value before refinement
  double kappa = 0.0;
};

nlohmann::json to_json(const DistanceResult& r);

// A closed surface around the t-axis, parametrized by (u, t) with u in [0, 1).
struct Surface {
  virtual ~Surface() = default;
  virtual double gauge(const Vec3& q) const = 0;  // < 1 inside, 1 on, > 1 outside
  virtual Vec3 point(double u, double t) const = 0;
  virtual Vec2 param(const Vec3& q) const = 0;  // radial projection onto the level curve
};

struct Box {
  Vec3 lo, hi;
};

struct RefineOptions {
  double rel_tol = 1e-7;  // stop when a sweep decreases length by less than this fraction
  int max_sweeps = 400;
  int max_vertices = 33;  // per coordinate-descent stage
  const Surface* end_surface = nullptr;  // let the last vertex slide on this surface
};

// Coordinate descent on interior vertices.  Never returns a longer path.
Polyline3 refine_path(const Polyline3& witness, const MetricField& m, const RefineOptions& opt = {});

struct GridOptions {
  double h = 0.05;
  double kappa = 0.10;  // metrication constant of the 26-neighbour stencil
  double pad_factor = 2.0;
  std::function<bool(const Vec3&)> excluded;  // optional exclusion region
  bool refine = true;
  std::size_t max_nodes = 6'000'000;
  std::optional<Box> box;
  // A* lower bound to the target; grid_distance defaults to the yt-plane bound.
  std::function<double(const Vec3&)> heuristic;
};

// A* on a 26-neighbour lattice whose axes are scaled by the metric at the
// midpoint of p and q, so that one step is about h long in every direction.
DistanceResult grid_distance(const Vec3& p, const Vec3& q, const MetricField& m, const GridOptions& opt = {});

// Grid search from q to the closed region {gauge <= 1}, then refinement with a sliding end.
DistanceResult point_to_surface_distance(const Vec3& q, const Surface& s, const MetricField& m,
                                         const GridOptions& opt = {});

// Exact distance in the plane x = 0 for the metric lambda^{2t} dy^2 + dt^2.
double yt_distance(const Vec3& p, const Vec3& q, double lambda);
// The geodesic realizing yt_distance, sampled at n+1 points uniformly in arclength.
Polyline3 yt_geodesic(const Vec3& p, const Vec3& q, double lambda, int n = 32);

struct SampleBox {
  Vec3 lo{-0.5, -0.5, -2.0};
  Vec3 hi{0.5, 0.5, 2.0};
};

// Max relative residual |v^T G(p) v - (Jv)^T G(Tp) (Jv)| / v^T G(p) v over random (p, v).
double verify_isometry(const std::function<Vec3(const Vec3&)>& map, const MetricField& m, int n_samples,
                       std::uint64_t seed, const SampleBox& box = {});

// mu_a(x, y, t) = (lambda^a x, lambda^-a y, t + a)
Vec3 mu_a(const Vec3& q, double a, double lambda);

struct DistanceRow {
  std::string id;
  DistanceResult r;
};
// Body of the distance CSV (header line included, no timestamp).
std::string distance_csv_body(const std::vector<DistanceRow>& rows);

}  // namespace fwq
