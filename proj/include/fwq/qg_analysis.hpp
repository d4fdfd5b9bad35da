#pragma once
// Escape-rate estimates for orbits leaving the tube: R_q, P_q and k', the
// yt-plane inequality for the orbit through (0, c, 0), the scan over boundary
// orbits, and the arithmetic that combines the constants.

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fwq/metric_engine.hpp"
#include "fwq/plug_builder.hpp"

namespace fwq {

// |c - c'| where (0, c', t) is the tube crossing of the level line on the y > 0 side.
double R_of(double t, const PlugModel& plug, double c);
// P_q(t) = R(t/2) lambda^(t/2) / t
double P_of(double t, const PlugModel& plug, double c);
// Last crossing of P = 1 on a geometric grid up to t_max, bisected to 1e-12 in t.
double k_prime(const PlugModel& plug, double c, double t_max = 50.0);

// Distance in the plane x = 0 under lambda^{2t} dy^2 + dt^2 from q to the
// sampled tube trace y = +-B(t), samples every h in t.
struct YtTubeDistance {
  double upper = 0.0;  // min over samples; each is realized by a yt geodesic
  double lower = 0.0;  // upper minus the sampling slack, capped by vertical escape
  Vec3 foot = Vec3::Zero();
  Polyline3 witness;
  double h = 0.0;
};
YtTubeDistance yt_tube_distance(const Vec3& q, const PlugModel& plug, double h = 0.02);

struct ClaimC0 {
  double t_low = 0.0;            // lowest t along the witness
  double drop_residual = 0.0;    // (t' - t_low) - D_upper - tol
  double spread_residual = 0.0;  // R(t_low) lambda^t_low - D_upper - tol
  double floor_residual = 0.0;   // (t_start - t_low) - tol, t_start = height where the orbit meets the tube
  double tol = 0.0;
  bool ok() const { return drop_residual <= 0 && spread_residual <= 0 && floor_residual <= 0; }
};
ClaimC0 verify_claim_c0(const Vec3& q, const Polyline3& witness, double d_upper, const PlugModel& plug, double c,
                        double tol);

struct E4Row {
  double t_prime, ell, d_lo, d_hi, residual, residual_lo;
  ClaimC0 c0;
};
struct E4Report {
  double c = 0.0, k_prime = 0.0, h = 0.0, tol = 0.0;
  std::vector<E4Row> rows;
  int violations = 0;
  double min_slope = 0.0;  // min over rows with D > 0 of (ell - k') / D
  nlohmann::json to_json() const;
  std::string csv_body() const;
};
E4Report verify_e4(const PlugModel& plug, double c, const std::vector<double>& t_grid, double h = 0.02,
                   double t_max = 50.0);

// C = K, c = K s1 + k + 2 s1 + s2
std::pair<double, double> prop_key_constants(double K, double k, double s1, double s2);
// C0 = 2 C1 + 2 a3 C1 + a3, c0 = 2 c1 + 2 a3 c1 + a4
std::pair<double, double> compose_constants(double C1, double c1, double a3, double a4);

struct FitSample {
  double length, distance;
};
// Smallest C at intercept c that keeps every sample under the line, or +inf if none does.
double fit_slope_at(const std::vector<FitSample>& s, double c, double h);
std::pair<double, double> fit_constants(const std::vector<FitSample>& samples, double h);

// Two-sided length distortion between the yt-restricted Solv metric and Ĝ1 on a random curve corpus.
struct Distortion {
  double a0 = 1.0, a1 = 0.0;
  double max_ratio = 1.0, min_ratio = 1.0;
  int n_curves = 0;
  std::uint64_t seed = 0;
};
Distortion measure_distortion(const MetricField& level, int n_curves, std::uint64_t seed);

struct Provenance {
  double value;
  std::string source;
};

struct KeyRow {
  int sample;
  double u, tau, t_prime, ell, d_lo, d_hi, residual, residual_lo;
};

struct QGReport {
  double C = 0.0, c = 0.0;
  std::string source;  // "composed" or "fitted"
  std::map<std::string, Provenance> inputs;
  std::vector<KeyRow> rows;
  int violations = 0;     // against the upper bounds
  int violations_lo = 0;  // against the lower bounds (diagnostic)
  double companion_residual_max = 0.0;
  double h = 0.0, tol = 0.0;
  bool verified() const { return violations == 0 && !rows.empty(); }
  nlohmann::json to_json() const;
  std::string csv_body() const;
};

struct KeyScanOptions {
  double delta = 0.05;
  int n_u = 20, n_tau = 4;  // candidate grid over a fundamental domain
  std::vector<double> t_grid{1, 5, 10, 20};
  double K = 2.0, k = 0.0;
  double s2_t_max = 25.0, s2_step = 0.25;
};
QGReport prop_key_scan(const PlugModel& plug, const BoundaryFoliationModel& fol, const MetricField& level,
                       const KeyScanOptions& opt);

}  // namespace fwq
