#pragma once
// Run configuration: strict JSON with a versioned schema, validated at load.
// Every failure is an Error with code Errc::Config.

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "fwq/core_charts.hpp"

namespace fwq {

inline constexpr const char* kConfigSchema = "fwq-config/1";

struct ModelConfig {
  IntMat2 matrix{{{2, 1}, {1, 1}}};
  double r1 = 0.025, r2 = 0.25;
  double theta0_over_lambda = 1.2;
  double r_tube = 0.008;
  double collar = 1.0;
};

struct SolverConfig {
  double grid_h = 0.05;  // lattice step for grid_distance
  double e4_h = 0.02;    // t-sampling of the tube trace
  double pad_factor = 2.0;
  double t_max = 50.0;
  std::vector<double> e4_t_grid{1, 2, 3, 5, 7, 10, 12, 15, 18, 20, 25, 30};
  std::vector<double> key_t_grid{1, 5, 10, 20};
  std::vector<double> cross_t_grid{1, 5, 10, 20};
};

struct AnalysisConfig {
  double delta = 0.05, delta_prime = 0.05;
  double angle_floor = 0.02;
  std::uint64_t seed = 20240601;
  int isometry_samples = 1000;
  int distortion_curves = 200;
  int key_n_u = 20, key_n_tau = 4;
  int cross_samples = 20;
  int minimality_trajectories = 5, minimality_competitors = 100;
  double minimality_T = 3.0;
};

struct OutputConfig {
  std::string dir = "fwq_out";
};

struct RunConfig {
  ModelConfig model;
  SolverConfig solver;
  AnalysisConfig analysis;
  OutputConfig output;

  static RunConfig defaults() { return {}; }
  static RunConfig parse(const std::string& text);  // throws Error(Config)
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
  // Rechecks every model invariant; throws Error(Config) naming the first failure.
  void validate() const;

  std::shared_ptr<const DAMapModel> da() const;
};

}  // namespace fwq
