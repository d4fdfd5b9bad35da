#include "fwq/config.hpp"

#include <set>

#include "fwq/artifacts.hpp"
#include "fwq/errors.hpp"
#include "fwq/plug_builder.hpp"

namespace fwq {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(Errc::Config, msg); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail("unknown key " + where + "." + k);
}

template <class T>
void get(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key + " has the wrong type");
  }
}

void positive(double v, const std::string& name) {
  if (!(v > 0)) fail(name + " must be positive");
}

void nonempty_positive(const std::vector<double>& g, const std::string& name) {
  if (g.empty()) fail(name + " must not be empty");
  for (double t : g)
    if (!(t > 0)) fail(name + " entries must be positive");
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  only_keys(j, "config", {"schema", "model", "solver", "analysis", "output"});
  if (!j.contains("schema") || !j["schema"].is_string() || j["schema"].get<std::string>() != kConfigSchema)
    fail(std::string("schema must be \"") + kConfigSchema + "\"");

  RunConfig c;
  if (j.contains("model")) {
    const json& m = j["model"];
    only_keys(m, "model", {"matrix", "r1", "r2", "theta0_over_lambda", "r_tube", "collar"});
    get(m, "matrix", "model", c.model.matrix);
    get(m, "r1", "model", c.model.r1);
    get(m, "r2", "model", c.model.r2);
    get(m, "theta0_over_lambda", "model", c.model.theta0_over_lambda);
    get(m, "r_tube", "model", c.model.r_tube);
    get(m, "collar", "model", c.model.collar);
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    only_keys(s, "solver", {"grid_h", "e4_h", "pad_factor", "t_max", "e4_t_grid", "key_t_grid", "cross_t_grid"});
    get(s, "grid_h", "solver", c.solver.grid_h);
    get(s, "e4_h", "solver", c.solver.e4_h);
    get(s, "pad_factor", "solver", c.solver.pad_factor);
    get(s, "t_max", "solver", c.solver.t_max);
    get(s, "e4_t_grid", "solver", c.solver.e4_t_grid);
    get(s, "key_t_grid", "solver", c.solver.key_t_grid);
    get(s, "cross_t_grid", "solver", c.solver.cross_t_grid);
  }
  if (j.contains("analysis")) {
    const json& a = j["analysis"];
    only_keys(a, "analysis",
              {"delta", "delta_prime", "angle_floor", "seed", "isometry_samples", "distortion_curves", "key_n_u",
               "key_n_tau", "cross_samples", "minimality_trajectories", "minimality_competitors", "minimality_T"});
    get(a, "delta", "analysis", c.analysis.delta);
    get(a, "delta_prime", "analysis", c.analysis.delta_prime);
    get(a, "angle_floor", "analysis", c.analysis.angle_floor);
    get(a, "seed", "analysis", c.analysis.seed);
    get(a, "isometry_samples", "analysis", c.analysis.isometry_samples);
    get(a, "distortion_curves", "analysis", c.analysis.distortion_curves);
    get(a, "key_n_u", "analysis", c.analysis.key_n_u);
    get(a, "key_n_tau", "analysis", c.analysis.key_n_tau);
    get(a, "cross_samples", "analysis", c.analysis.cross_samples);
    get(a, "minimality_trajectories", "analysis", c.analysis.minimality_trajectories);
    get(a, "minimality_competitors", "analysis", c.analysis.minimality_competitors);
    get(a, "minimality_T", "analysis", c.analysis.minimality_T);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    only_keys(o, "output", {"dir"});
    get(o, "dir", "output", c.output.dir);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::exception& e) {
    fail("cannot read config " + path + ": " + e.what());
  }
  return parse(text);
}

json RunConfig::to_json() const {
  return {{"schema", kConfigSchema},
          {"model",
           {{"matrix", model.matrix},
            {"r1", model.r1},
            {"r2", model.r2},
            {"theta0_over_lambda", model.theta0_over_lambda},
            {"r_tube", model.r_tube},
            {"collar", model.collar}}},
          {"solver",
           {{"grid_h", solver.grid_h},
            {"e4_h", solver.e4_h},
            {"pad_factor", solver.pad_factor},
            {"t_max", solver.t_max},
            {"e4_t_grid", solver.e4_t_grid},
            {"key_t_grid", solver.key_t_grid},
            {"cross_t_grid", solver.cross_t_grid}}},
          {"analysis",
           {{"delta", analysis.delta},
            {"delta_prime", analysis.delta_prime},
            {"angle_floor", analysis.angle_floor},
            {"seed", analysis.seed},
            {"isometry_samples", analysis.isometry_samples},
            {"distortion_curves", analysis.distortion_curves},
            {"key_n_u", analysis.key_n_u},
            {"key_n_tau", analysis.key_n_tau},
            {"cross_samples", analysis.cross_samples},
            {"minimality_trajectories", analysis.minimality_trajectories},
            {"minimality_competitors", analysis.minimality_competitors},
            {"minimality_T", analysis.minimality_T}}},
          {"output", {{"dir", output.dir}}}};
}

void RunConfig::validate() const {
  if (!(model.r1 > 0)) fail("model.r1 must be positive");
  if (!(model.r1 < model.r2)) fail("model.r1 must be smaller than model.r2 (r1 < r2)");
  positive(model.r_tube, "model.r_tube");
  positive(model.collar, "model.collar");
  positive(solver.grid_h, "solver.grid_h");
  positive(solver.e4_h, "solver.e4_h");
  if (!(solver.pad_factor >= 1)) fail("solver.pad_factor must be at least 1");
  positive(solver.t_max, "solver.t_max");
  nonempty_positive(solver.e4_t_grid, "solver.e4_t_grid");
  nonempty_positive(solver.key_t_grid, "solver.key_t_grid");
  nonempty_positive(solver.cross_t_grid, "solver.cross_t_grid");
  if (!(analysis.delta > 0 && analysis.delta_prime > 0)) fail("analysis.delta and delta_prime must be positive");
  positive(analysis.angle_floor, "analysis.angle_floor");
  if (analysis.isometry_samples < 1 || analysis.distortion_curves < 1 || analysis.key_n_u < 1 ||
      analysis.key_n_tau < 1 || analysis.cross_samples < 1 || analysis.minimality_trajectories < 1 ||
      analysis.minimality_competitors < 1)
    fail("analysis sample counts must be at least 1");
  positive(analysis.minimality_T, "analysis.minimality_T");
  if (output.dir.empty()) fail("output.dir must not be empty");

  std::shared_ptr<const DAMapModel> m;
  try {
    m = da();
  } catch (const Error& e) {
    if (e.code() == Errc::Config) throw;
    fail(std::string("model: ") + e.what());
  }
  if (const auto v = m->invariant_violations(); !v.empty()) fail("model violates invariant: " + v.front());
  try {
    const PlugModel plug(m, model.r_tube, model.collar);
    if (const auto v = plug.invariant_violations(); !v.empty()) fail("plug violates invariant: " + v.front());
  } catch (const Error& e) {
    if (e.code() == Errc::Config) throw;
    fail(std::string("plug: ") + e.what());
  }
}

std::shared_ptr<const DAMapModel> RunConfig::da() const {
  const LatticeAutomorphism a = eigen_decompose(model.matrix);
  return std::make_shared<const DAMapModel>(model.matrix, model.r1, model.r2, model.theta0_over_lambda * a.lambda);
}

}  // namespace fwq
