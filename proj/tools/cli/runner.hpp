#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli/scenario.hpp"

namespace ltvcli {

enum ExitCode { kExitSuccess = 0, kExitError = 1, kExitInfeasible = 2 };

struct Overrides {
  std::optional<double> tol_quad;
  std::optional<double> tol_fac;
  std::optional<std::uint64_t> seed;
};

void apply(const Overrides& o, Scenario& s);

// Built-in reproductions: ex1 steers the transition matrix of a rotating,
// partly uncontrollable 3-state system; ex2 steers a 2-state covariance.
Scenario example_scenario(const std::string& name);

// Executes one scenario, writing report.json and the CSV artifacts into out.
// Returns the process exit code; diagnostics go to err.
int run_scenario(const Scenario& s, const std::filesystem::path& out, std::ostream& err);

// Full command line: `run <scenario.json> --out <dir> [...]` or
// `example <ex1|ex2> --out <dir>`.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ltvcli
