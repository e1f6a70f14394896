#pragma once

// The four pdcsim scenarios on top of a parsed RunConfig.

#include "pdc/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace pdc {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
};

struct RunContext {
  std::ostream& out;  ///< CSV when no output path is set, and reports
  std::ostream& log;  ///< diagnostics and errors
  std::optional<std::string> out_path;
  unsigned threads = 0;
};

/// Runs one scenario and maps failures to exit codes. A CSV is only written
/// once the whole table has been computed.
int run_scenario(Scenario scenario, const RunConfig& cfg, const RunContext& ctx);

/// "%.17g"; nan and inf spelled out.
std::string format_number(double v);

std::string dynamics_csv(const FullVsEffective& run);
std::string scan_csv(const std::vector<ScanRow>& rows, double epsilon_c);

/// Epsilon values (Hz) requested by the config.
std::vector<double> scan_epsilons(const RunConfig& cfg);

}  // namespace pdc
