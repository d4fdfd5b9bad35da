#include <doctest.h>

#include <string>

#include "fwq/config.hpp"
#include "fwq/errors.hpp"
#include "fwq/pipelines.hpp"

using namespace fwq;

namespace {
std::string config_error(const std::string& text) {
  try {
    RunConfig::parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Config);
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("defaults validate and round-trip through JSON") {
  const RunConfig d = RunConfig::defaults();
  CHECK_NOTHROW(d.validate());
  const RunConfig back = RunConfig::parse(d.to_json().dump());
  CHECK(back.to_json() == d.to_json());
  CHECK(d.solver.e4_t_grid.size() == 12);
}

TEST_CASE("partial config keeps the remaining defaults") {
  const RunConfig c = RunConfig::parse(R"({"schema": "fwq-config/1", "analysis": {"seed": 99}})");
  CHECK(c.analysis.seed == 99);
  CHECK(c.model.r2 == 0.25);
}

TEST_CASE("strict parsing") {
  CHECK(config_error("{") .find("malformed") != std::string::npos);
  CHECK(config_error(R"({"model": {}})").find("schema") != std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/2"})").find("schema") != std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "extra": 1})").find("unknown key config.extra") !=
        std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "model": {"r3": 1}})").find("model.r3") != std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "model": {"r1": "big"}})").find("wrong type") !=
        std::string::npos);
}

TEST_CASE("invariant violations name the invariant") {
  CHECK(config_error(R"({"schema": "fwq-config/1", "model": {"r1": 0.3, "r2": 0.25}})").find("r1 < r2") !=
        std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "model": {"matrix": [[1, 1], [0, 1]]}})")
            .find("NonHyperbolic") != std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "model": {"theta0_over_lambda": 0.9}})").find("theta0") !=
        std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "model": {"r1": 0.1}})").find("increasing") !=
        std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "model": {"r_tube": 0.05}})").find("plug violates invariant") != std::string::npos);
  CHECK(config_error(R"({"schema": "fwq-config/1", "solver": {"e4_t_grid": []}})").find("e4_t_grid") !=
        std::string::npos);
}

TEST_CASE("unknown stage is a config error") {
  try {
    run_stage("nope", RunConfig::defaults());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Config);
  }
}

TEST_CASE("verify-e4 stage rows carry h and tol") {
  const StageResult r = run_verify_e4(RunConfig::defaults());
  CHECK(r.pass());
  REQUIRE(r.csv.size() == 1);
  const std::string& body = r.csv.front().second;
  int lines = 0;
  for (char ch : body) lines += ch == '\n';
  CHECK(lines == 13);  // header + 12 rows
  CHECK(body.find(",h,tol\n") != std::string::npos);
  // identical config, identical body
  CHECK(run_verify_e4(RunConfig::defaults()).csv.front().second == body);
}
