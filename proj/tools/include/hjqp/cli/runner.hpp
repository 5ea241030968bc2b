#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjqp/cli/config.hpp"
#include "hjqp/effective.hpp"
#include "hjqp/errors.hpp"
#include "hjqp/rate_fit.hpp"

namespace hjqp::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_assertion = 4 };

int exit_code_for(ErrorKind kind);

struct RunOptions {
  std::optional<std::string> out_dir;  // overrides [output] dir
  bool assert_mode = false;
  bool plot = false;
};

struct RunOutcome {
  int exit_code = exit_ok;
  std::vector<std::string> files;
  std::vector<std::string> summary;  // "key = value" lines, also stored in the manifest
  std::optional<RateFit> fit;
  std::optional<double> max_error;
  std::vector<std::string> assertion_failures;
};

// Runs the experiment and writes <out>/<kind>.csv, <out>/manifest.cfg and, with plot,
// <out>/<kind>.svg. Library errors are thrown; run_guarded maps them to exit codes.
RunOutcome run(const ExperimentConfig& config, const RunOptions& options);
RunOutcome run_guarded(const ExperimentConfig& config, const RunOptions& options, std::string* message = nullptr);

// EffectiveModel from <cache_dir>/effective-<key>.csv when present, built and stored otherwise.
EffectiveModel effective_model(const ExperimentConfig& config);

struct HypothesisReport {
  double sigma = 0.0;
  double diophantine_C = 0.0;
  bool sigma_above_grid = false;
  double sobolev_s = 0.0;  // n/2 + sigma + 0.05
  bool sobolev_converged = false;
  double holder_alpha = 0.0;
  bool p1 = false;
  bool p4 = false;
  std::string row;  // regime used for the predictions
  double lower_exponent = 0.0;
  double upper_exponent = std::numeric_limits<double>::quiet_NaN();
  bool upper_logarithmic = false;
  std::vector<std::string> lines;
};

// Which hypotheses the configured (U, xi) satisfies empirically, and the predicted exponents.
HypothesisReport validate(const ExperimentConfig& config);

}  // namespace hjqp::cli
