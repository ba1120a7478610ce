#pragma once

#include <filesystem>
#include <string>

#include "eqlab/cli/config.hpp"

namespace eqlab::cli {

/// Process exit codes of every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitToleranceFailure = 1,
  kExitConfigError = 2,
  kExitFieldError = 3,
  kExitNonConvex = 4,
};

/// Runs one subcommand ("identities", "sweep", "asymptotics", "flow", "mfs",
/// "planar") on a resolved configuration, writing its reports into `out`
/// (created if missing). Library exceptions are mapped onto exit codes here:
/// configuration and bracketing problems give 2, field/shape construction and
/// ill-conditioned fits give 3, numerical failures during a run give 1.
int run_command(const std::string& command, const RunConfig& config,
                const std::filesystem::path& out);

/// Full command-line entry point:
///   eqlab <identities|sweep|asymptotics|flow|mfs|planar> [--config PATH]
///         [--out DIR] [--threads N] [--seed N] [--n-theta N] [--n-phi N]
///         [--tol-KEY=VALUE ...]
/// The log level comes from EQLAB_LOG (error | warn | info | debug).
int run_cli(int argc, char** argv);

/// Text printed at the top of every run and embedded in every report.
const char* flux_convention();

}  // namespace eqlab::cli
