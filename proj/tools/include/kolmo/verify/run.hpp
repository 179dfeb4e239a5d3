#pragma once

#include "kolmo/verify/report.hpp"
#include "kolmo/verify/scenario.hpp"
#include "kolmo/verify/suites.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace kolmo::verify {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailedChecks = 1,
  kExitUsage = 2,
  kExitBadScenario = 3,
};

struct RunOptions {
  std::filesystem::path scenario;
  std::string suite = "all";
  std::filesystem::path out = "verify_out";
  std::optional<std::uint64_t> seed;
  bool refine = false;  // force the refinement studies on
};

/// Suites named by a filter: "all" or one suite name. Throws std::invalid_argument otherwise.
std::vector<std::string> select_suites(const std::string& filter, const Scenario& sc);

/// Runs the suites and assembles the report (records sorted by name). Tables and snapshots
/// are written under `out` when it is non-empty.
VerificationReport run_scenario(const Scenario& sc, const std::vector<std::string>& suites,
                                const std::filesystem::path& out = {});

/// Whole command: parse, run, write report.json and tables. Returns an ExitCode.
int run(const RunOptions& opt, std::ostream& log, std::ostream& err);

}  // namespace kolmo::verify
