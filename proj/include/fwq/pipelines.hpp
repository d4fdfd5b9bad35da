#pragma once
// One function per CLI subcommand.  Each returns its checks, a JSON report
// and CSV bodies; writing files is left to the caller.

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "fwq/config.hpp"

namespace fwq {

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

struct StageResult {
  explicit StageResult(std::string name = {}) : stage(std::move(name)) {}
  std::string stage;
  std::vector<Check> checks;
  nlohmann::json report = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> csv;  // file name, body without timestamp
  bool pass() const;
  void check(std::string name, bool ok, std::string detail = {});
};

StageResult run_build_plug(const RunConfig& cfg);
StageResult run_check_isometries(const RunConfig& cfg);
StageResult run_distance(const RunConfig& cfg);  // vertical segments, yt oracle, Sasaki minimality
StageResult run_scan_boundary(const RunConfig& cfg);
StageResult run_verify_e4(const RunConfig& cfg);
StageResult run_verify_keyprop(const RunConfig& cfg);
StageResult run_fit_qg(const RunConfig& cfg);
StageResult run_glue(const RunConfig& cfg);
StageResult run_verify_gluing(const RunConfig& cfg);
// Merges every stage JSON found in dir into one summary; never reads its own output.
StageResult run_report(const std::string& dir);

const std::vector<std::string>& stage_names();
StageResult run_stage(const std::string& name, const RunConfig& cfg);

}  // namespace fwq
