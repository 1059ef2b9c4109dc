#pragma once

// Command-line front end: `consamp <command> [flags]` with commands
// sample, tmg-bench, bridge and density.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace consamp {

/// Bad flags, bad config files, failed validation. Exit status 1.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2, kExitSampler = 3 };

const std::vector<std::string>& command_names();

struct RunConfig {
  std::string command;
  std::optional<std::filesystem::path> config_file;

  std::string model;
  std::string sampler;
  std::vector<std::string> samplers;
  long dim = 0;
  std::optional<long> samples;
  std::optional<long> burnin;
  std::optional<double> eps;
  std::optional<int> leaps;
  std::optional<double> jitter;
  std::optional<double> scale;
  std::optional<double> travel_time;
  std::uint64_t seed = 42;
  int replicates = 1;

  std::optional<std::filesystem::path> input;
  std::filesystem::path output_dir;

  // bridge
  std::vector<double> q;
  std::vector<double> r;
  int grid_points = 12;

  // density
  std::optional<int> basis;
  double decay = 1.2;
  int domain_dim = 1;
  long n = 1000;

  // tmg-bench (dim 2) and density
  std::optional<int> grid;

  /// Throws UsageError on the first invalid field.
  void validate() const;
};

/// Parses `args` (without the program name). Flags override entries of the
/// file given by --config, which holds `key = value` lines with keys named
/// after the long flags. The output directory defaults to
/// $CONSAMP_OUTPUT_DIR, then the working directory.
/// Throws UsageError; --help text is reported through HelpRequested.
RunConfig parse_config(const std::vector<std::string>& args);

struct HelpRequested {
  std::string text;
};

/// Runs a validated config, writing artifacts under cfg.output_dir and a
/// human-readable summary to `out`.
void run_command(const RunConfig& cfg, std::ostream& out);

/// parse_config + run_command with errors mapped to ExitCode values.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace consamp
