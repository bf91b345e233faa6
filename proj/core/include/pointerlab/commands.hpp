#pragma once

// Command layer behind the pointerlab CLI. Each command reads a RunConfig,
// writes its data files plus manifest.json into the output directory and
// returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/run_config.hpp"

namespace pointerlab {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnvVar = "POINTERLAB_OUT";
inline constexpr const char* kFallbackOutputDir = "pointerlab-out";

enum ExitCode : int {
  kExitSuccess = 0,
  kExitPropertyFailure = 1,  // check: a property failed; macro-test: not macroscopic
  kExitValidation = 2,
  kExitUnconverged = 3,
  kExitFitRefusal = 4,
};

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::vector<std::uint64_t>> seeds;
  bool allow_unconverged = false;
  int threads = 1;
  /// Record wall times in scan.csv. Off by default so reruns are byte-identical.
  bool timing = false;
  std::ostream* log = nullptr;
};

struct MacroTestOptions {
  std::string family = "pointer";  // pointer | single-unit | constant
  int k = 1;
  int trials = 8;
  /// Evaluate on the product states only (no time average).
  bool static_only = false;
};

/// --out, then [output] directory, then $POINTERLAB_OUT, then "pointerlab-out".
std::filesystem::path resolve_output_dir(const CommandOptions& options, const RunConfig& config);

/// Loads the config and applies command-line overrides.
RunConfig effective_config(const CommandOptions& options);

int cmd_simulate(const CommandOptions& options);
int cmd_scan(const CommandOptions& options);
/// `hamiltonian` replaces the operator built from the config (test fixtures).
int cmd_check(const CommandOptions& options, const Operator* hamiltonian = nullptr);
int cmd_algebra(double alpha, double alpha_prime, std::ostream& out);
int cmd_macro_test(const CommandOptions& options, const MacroTestOptions& macro);

/// Parses "1,2,5-8" style seed lists.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace pointerlab
