#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace guarantor::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,          // OPTIMAL plan, or verification PASS
    kFail = 1,        // verification FAIL
    kError = 2,       // bad input or numerical failure; error JSON on stderr
    kNoOptimum = 3,
    kUnbounded = 4,
};

/// Writes solution.json and payoff.csv to the output directory.
int cmd_solve(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Monte Carlo check of a solution; writes verification.json.
int cmd_verify(const std::filesystem::path& config, const std::filesystem::path& solution,
               std::ostream& out, std::ostream& err);

/// Subset enumeration on a discrete instance; writes oracle.json.
int cmd_oracle(const std::filesystem::path& instance, std::ostream& out, std::ostream& err);

/// `param` is one of c-grid, rho0, delta, beta; `values` a comma-separated
/// list. Writes sweep_<param>.csv and echoes it to `out`.
int cmd_sweep(const std::filesystem::path& config, const std::string& param, const std::string& values,
              std::ostream& out, std::ostream& err);

}  // namespace guarantor::cli
