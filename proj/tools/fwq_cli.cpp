// fwq: batch driver.  Exit 0 when every check passed, 1 on a failed check or
// a numerical error, 2 on a bad config or command line.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>

#include "fwq/artifacts.hpp"
#include "fwq/config.hpp"
#include "fwq/errors.hpp"
#include "fwq/pipelines.hpp"

namespace {

int run(const std::string& sub, const std::string& config_path, const std::string& out_flag,
        std::optional<std::uint64_t> seed, std::optional<double> grid_h, bool quiet) {
  using namespace fwq;
  RunConfig cfg = config_path.empty() ? RunConfig::defaults() : RunConfig::load(config_path);
  if (seed) cfg.analysis.seed = *seed;
  if (grid_h) cfg.solver.grid_h = *grid_h;
  if (!out_flag.empty()) cfg.output.dir = out_flag;
  cfg.validate();
  std::filesystem::create_directories(cfg.output.dir);
  const auto path = [&](const std::string& f) { return (std::filesystem::path(cfg.output.dir) / f).string(); };

  const StageResult r = sub == "report" ? run_report(cfg.output.dir) : run_stage(sub, cfg);
  for (const auto& [file, body] : r.csv) write_text(path(file), timestamp_line() + body);
  const std::string json_name = sub == "report" ? "summary.json" : sub + ".json";
  write_json(path(json_name), r.report);
  for (const auto& c : r.checks)
    if (!c.pass) std::cerr << "check failed: " << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  if (!quiet) {
    int ok = 0;
    for (const auto& c : r.checks) ok += c.pass;
    std::cout << sub << ": " << (r.pass() ? "ok" : "FAILED") << ", " << ok << "/" << r.checks.size()
              << " checks, artifacts in " << cfg.output.dir << "\n";
  }
  return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasigeodesic checks for the Franks-Williams construction"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_h;
  bool quiet = false;
  app.add_option("--config", config, "JSON config (defaults when omitted)");
  app.add_option("--out", out, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "override analysis.seed");
  app.add_option("--grid-h", grid_h, "override solver.grid_h")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "no summary line");
  for (const auto& s : fwq::stage_names()) app.add_subcommand(s);
  app.add_subcommand("report", "merge stage artifacts into summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, config, out, seed, grid_h, quiet);
  } catch (const fwq::Error& e) {
    std::cerr << "fwq " << sub << ": " << e.what() << "\n";
    return e.code() == fwq::Errc::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "fwq " << sub << ": " << e.what() << "\n";
    return 1;
  }
}
