#pragma once
// Geodesic flow on the tangent bundle of the upper half-plane with the
// Sasaki-type metric |d pi V|^2 + |Dv/dt|^2.

#include <cstdint>
#include <json.hpp>
#include <utility>
#include <vector>

#include "fwq/core_charts.hpp"

namespace fwq {

struct TangentPoint {
  Vec2 p;  // p.y() > 0
  Vec2 v;
};

struct TangentCurve {
  std::vector<double> s;  // parameter values, increasing
  std::vector<TangentPoint> pts;
};

inline double hyp_norm(const Vec2& p, const Vec2& v) { return v.norm() / p.y(); }

// Unit-speed geodesic with gamma(0) = p, gamma'(0) = v / |v|_hyp, in closed form.
TangentPoint h2_geodesic(const Vec2& p, const Vec2& v, double t);
// (gamma, gamma') sampled at n + 1 equally spaced times on [0, T].
TangentCurve geodesic_trajectory(const Vec2& p, const Vec2& v, double T, int n);

// Trapezoid rule on the sampled integrand; derivatives by central differences.
double sasaki_length(const TangentCurve& c);
double base_length(const TangentCurve& c);  // hyperbolic length of the base curve

struct MinimalityReport {
  double flow_length = 0.0;
  double zero_amplitude_gap = 0.0;  // |competitor(0) - flow|
  std::vector<double> amplitudes;
  std::vector<double> min_margin;     // per amplitude
  std::vector<double> median_margin;  // per amplitude
  int n_competitors = 0;
  int violations = 0;
  std::uint64_t seed = 0;
  nlohmann::json to_json() const;
};

// Random base and fiber bumps pinned at both ends; n_competitors per amplitude.
MinimalityReport verify_flowline_minimality(const Vec2& p, const Vec2& v, double T, int n_competitors,
                                            std::uint64_t seed, std::vector<double> amplitudes = {0.05, 0.1, 0.2},
                                            int n_samples = 2000);

// A0 = eta1 eta3 / eta2, A1 = eta1 eta4 / eta2 + eta1
std::pair<double, double> transfer_constants(double eta1, double eta2, double eta3, double eta4);

}  // namespace fwq
