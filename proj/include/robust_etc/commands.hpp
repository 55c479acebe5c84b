#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "robust_etc/config.hpp"

namespace robust_etc {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
  kExitVerificationFailure = 4,
};

struct CommandResult {
  int exit_code = kExitOk;
  /// Human-readable summary for stdout.
  std::string summary;
  std::vector<std::filesystem::path> written;
};

/// synth.json with P, K, L, Z, Q₁, μ₁ and the feasibility report. Exit 3 when
/// Z or μ₁ could not be formed; the partial artifact is still written.
CommandResult run_synth(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// trace.csv plus simulate.json for the configured policy.
CommandResult run_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// compare.json plus trace_periodic.csv and trace_event.csv.
CommandResult run_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// verify.json: feasibility report, identity, lemma checks over Ω, the
/// dissipation audit of an event-triggered run and the random campaigns.
/// Exit 4 unless every check holds.
CommandResult run_verify(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Writes the scaffold config to `out_dir/config.json`.
CommandResult run_scaffold(const std::filesystem::path& out_dir);

}  // namespace robust_etc
