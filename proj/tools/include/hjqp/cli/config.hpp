#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hjqp/effective.hpp"
#include "hjqp/ergodic.hpp"
#include "hjqp/homog.hpp"
#include "hjqp/quad.hpp"
#include "hjqp/torus.hpp"

namespace hjqp::cli {

enum class ExperimentKind { effective, corrector, birkhoff, unbounded_mean, inclusion, characteristics, homogenize, sweep };

std::string to_string(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(const std::string& s);
const std::vector<std::string>& experiment_names();

struct PotentialSpec {
  std::string kind = "a1";  // a1 | a2 | trig | constant
  double gamma = 6.0;
  std::vector<double> xi{1.0, 1.4142135623730951};
  std::vector<FourierMode> modes;  // trig
  double value = 0.0;              // constant
  int resonance_cutoff = 50;
};

struct ObservableSpec {
  std::string kind = "single-mode";  // single-mode | sum-of-sines | sqrt-u | constant
  std::vector<int> k{1, 0};
  int phase = 0;
  double scale = 1.0;
  double value = 1.0;
};

struct InitialSpec {
  std::string kind = "cone";  // cone | affine | smooth-bump
  double slope = 1.0;
  double width = 1.0;
  double center = 0.0;
  double height = 1.0;
  double offset = 0.0;
};

struct AssertSpec {
  double exponent_min = std::numeric_limits<double>::quiet_NaN();
  double exponent_max = std::numeric_limits<double>::quiet_NaN();
  double r_squared_min = std::numeric_limits<double>::quiet_NaN();
  double max_error = std::numeric_limits<double>::quiet_NaN();
  bool nonincreasing = false;
};

// One file determines a run. Sections and keys are listed in the README; every default
// is written back by to_text.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::sweep;
  PotentialSpec potential;
  QuadratureSpec quad;
  EffectiveOptions effective;
  int effective_p_points = 50;
  double effective_p_span = 5.0;

  std::vector<double> T_grid;    // birkhoff, unbounded-mean
  std::vector<double> t_grid;    // corrector, characteristics
  std::vector<double> eps_grid;  // sweep, inclusion
  int r_points = 200;
  std::vector<double> p_offsets{0.0, 1.0};  // corrector, characteristics: p = p0 + offset

  ObservableSpec observable;
  std::optional<double> mean;         // birkhoff
  std::optional<double> start;        // unbounded-mean
  double inclusion_stride = 97.0;
  double inclusion_max_window = 1e7;

  InitialSpec u0;
  std::vector<double> points{-1.0, -0.5, 0.0, 0.5, 1.0};
  double time = 1.0;
  double epsilon = 0.015625;  // homogenize
  double fd_dx = 0.0;         // homogenize: 0 disables the FD oracle
  double fd_cfl = 0.5;

  std::string out_dir = "out";
  bool cache = true;
  std::string cache_dir;  // empty: <out_dir>/cache

  AssertSpec assertions;
};

// Defaults for kind-dependent grids.
ExperimentConfig default_config(ExperimentKind kind);

// Throws Error(config) with the offending line on any problem.
// fallback is the kind used when the text has no [experiment] kind.
ExperimentConfig parse_config(const std::string& text, ExperimentKind fallback = ExperimentKind::sweep);
ExperimentConfig load_config(const std::string& path, ExperimentKind fallback = ExperimentKind::sweep);
// Fully materialized config text; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& c);
// Grid, tolerance and resonance checks.
void validate_config(const ExperimentConfig& c);

Potential make_potential(const ExperimentConfig& c);
Observable make_observable(const ExperimentConfig& c, const Potential& P);
InitialData make_initial(const ExperimentConfig& c);

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

}  // namespace hjqp::cli
