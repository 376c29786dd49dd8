#pragma once

#include "cylreg/config.hpp"
#include "cylreg/verify.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cylreg {

// Exit codes shared with the CLI: 0 pass, 1 check failure, 2 config/usage error.
struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
};

nlohmann::json check_to_json(const CheckResult& c);

// Writes paths.csv (replica, coord, t, value), jumps.csv (replica, coord,
// time, size) and summary.json with per-coordinate increment statistics.
RunOutcome run_simulate(const RunConfig& cfg, const std::string& out_dir);

// Resolves the truncation (explicit m or tol-driven plan), then writes
// coords.csv (replica, t, c_1..c_m), qnorm.csv and plan.json.
RunOutcome run_radonify(const RunConfig& cfg, const std::string& out_dir);

// Runs the requested checks (empty list: every applicable check) and writes
// report.json; exit code 1 unless every check passes.
RunOutcome run_verify(const RunConfig& cfg, const std::string& out_dir,
                      std::vector<std::string> checks);

// Runs the Sazonov-continuity certificate search and writes certificate.json.
RunOutcome run_certificate(const RunConfig& cfg, const std::string& out_dir,
                           std::optional<double> epsilon_override);

// Known check names, in report order.
const std::vector<std::string>& known_checks();

}  // namespace cylreg
