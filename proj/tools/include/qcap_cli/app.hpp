#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qcap_cli/config.hpp"

namespace qcap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline const std::vector<std::string> kExperiments = {
    "moments", "spectrum", "rate", "upper-bound", "sweep-snr",
    "sweep-aclr", "montecarlo", "waveform"};

/// Result files keyed by file name, plus non-fatal warnings.
struct RunOutput {
  std::map<std::string, std::string> files;
  std::vector<std::string> warnings;
};

/// Validates and executes one experiment document entirely in memory.
/// Throws ConfigError / ContractError for invalid input and NumericalError /
/// InfiniteRateError for failed computations.
RunOutput run_experiment(const json& config);

/// Every documented default, as a nested document.
json defaults_document();
/// Nested document flattened to "a.b.c,value" lines.
std::string flatten_csv(const json& doc);

/// Command-line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcap::cli
