#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csh/config.hpp"
#include "csh/error.hpp"

namespace csh {

enum class ExitCode : int { Ok = 0, Usage = 1, CheckFailed = 2, NumericalFailure = 3 };

/// Usage for configuration and regime errors, NumericalFailure for the rest.
ExitCode exit_code_for(ErrorKind kind);

struct Check {
  std::string name;
  double value;
  double threshold;
  bool passed;
};

struct RunReport {
  ExitCode exit_code = ExitCode::Ok;
  std::vector<Check> checks;
  std::string failed_check;  // first failing check, empty when all pass
  std::string error;         // solver error message for Usage / NumericalFailure
  std::filesystem::path dir;
};

struct RunOptions {
  bool allow_unproven_alpha = false;
  bool write_files = true;
};

/// Output directory: $CSH_OUTPUT_DIR when set, otherwise the configured one.
std::filesystem::path output_dir(const RunConfig& cfg);

/// Solves the configured regime, evaluates its checks and writes
///   planar: profile.csv, manifest.json and *.dat plot files
///   sphere: vertices.csv, faces.csv, fields.csv, manifest.json and *.dat
/// into `dir` (created if needed). Solver errors are caught and reported.
RunReport run(const RunConfig& cfg, const std::filesystem::path& dir, const RunOptions& opts = {});
RunReport run(const RunConfig& cfg, const RunOptions& opts = {});

struct SweepSpec {
  std::string key;
  double start;
  double stop;
  double step;

  std::vector<double> values() const;  // start, start+step, ... while <= stop (+ rounding slack)
};

/// "key=start:stop:step"; ParseError on malformed text, ValidationError on a
/// non-positive step or an empty range.
SweepSpec parse_sweep(std::string_view text);

/// One run per sweep value, each in its own subdirectory "<key>_<value>" of
/// the output directory; runs execute concurrently.
std::vector<RunReport> run_sweep(const RunConfig& cfg, const SweepSpec& sweep,
                                 const RunOptions& opts = {});

/// Worst exit code over a set of reports.
ExitCode combined_exit(const std::vector<RunReport>& reports);

}  // namespace csh
