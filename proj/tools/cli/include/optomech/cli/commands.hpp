#pragma once

// Subcommands of the optomech driver. Each writes its files into out_dir
// (atomically, one file at a time) and returns the process exit code.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "optomech/cli/config.hpp"

namespace optomech::cli {

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  /// Run the oracle cross-checks and fail (exit 3) when they miss tolerance.
  bool verify = false;
  std::ostream* log = nullptr;  // progress lines; nullptr is silent
};

struct CommandResult {
  int exit_code = exit_code::success;
  std::vector<std::filesystem::path> files;
};

/// One line of the verification report.
struct VerifyRecord {
  std::string name;
  std::string relation;  // "<=" or ">="
  double tolerance = 0.0;
  double measured = 0.0;
  bool pass = false;
  std::string detail;
  int failure_code = exit_code::numerical_failure;
};

CommandResult cmd_spectrum(const RunConfig& config, const CommandOptions& opts);
CommandResult cmd_evolve(const RunConfig& config, const CommandOptions& opts);
CommandResult cmd_husimi(const RunConfig& config, const CommandOptions& opts);
CommandResult cmd_sweep(const RunConfig& config, const CommandOptions& opts);
CommandResult cmd_verify(const RunConfig& config, const CommandOptions& opts);

/// The invariant suite behind cmd_verify, without writing a report.
std::vector<VerifyRecord> run_invariants(const RunConfig& config);

/// Dispatches on `experiment` (which may differ from config.experiment).
CommandResult run_command(Experiment experiment, const RunConfig& config, const CommandOptions& opts);

std::string tool_version();

}  // namespace optomech::cli
