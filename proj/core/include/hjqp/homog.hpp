#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hjqp/effective.hpp"
#include "hjqp/quad.hpp"
#include "hjqp/rate_fit.hpp"
#include "hjqp/torus.hpp"

namespace hjqp {

enum class InitialKind { affine, cone, smooth_bump };
std::string to_string(InitialKind k);

// affine:      slope * y + offset
// cone:        -slope * min(|y - center|, width); width may be +inf
// smooth_bump: height * exp(-((y - center) / width)^2)
class InitialData {
 public:
  static InitialData affine(double slope, double offset = 0.0);
  static InitialData cone(double slope = 1.0, double width = 1.0, double center = 0.0);
  static InitialData smooth_bump(double height, double width, double center = 0.0);

  InitialKind kind() const noexcept { return kind_; }
  const std::vector<double>& parameters() const noexcept { return params_; }
  double operator()(double y) const noexcept;
  double lipschitz_constant() const noexcept;
  double inf() const noexcept;
  double sup() const noexcept;
  double min_on(double a, double b) const noexcept;

 private:
  InitialData(InitialKind k, std::vector<double> p) : kind_(k), params_(std::move(p)) {}
  InitialKind kind_;
  std::vector<double> params_;
};

// r0 with r0 = Lip(u0) sqrt(2 (r0 + |U|_inf)) + C_hat, C_hat = |U|_inf; r = r0 solves the
// fixed point in closed form.
double energy_cutoff(const InitialData& u0, const Potential& P);

enum class ActionBranch { plus, minus, nonpositive };
std::string to_string(ActionBranch b);

// -r t + eps int_{x/eps}^{y} sqrt(2 (r - V)) |dx| + u0(eps y), y the endpoint at time t/eps
// of the branch started at x/eps.
double action_value(const Potential& P, const InitialData& u0, double r, ActionBranch branch, double x, double t,
                    double eps, const QuadratureSpec& spec);

struct UepsOptions {
  int r_grid_points = 200;
  double r_grid_span = 1e-10;  // smallest grid energy relative to the largest
  int polish_candidates = 3;
  double polish_rel_tol = 1e-10;
};

struct HomogenizationResult {
  double x = 0.0;
  double t = 0.0;
  double epsilon = 0.0;
  double u_eps = 0.0;
  double u_hom = std::numeric_limits<double>::quiet_NaN();
  double r_star = 0.0;
  ActionBranch branch = ActionBranch::nonpositive;
  double endpoint = 0.0;        // eps y of the minimizing trajectory (interval end for r <= 0)
  double sandwich_lo = 0.0;     // eps eta0^-(t/eps)
  double sandwich_hi = 0.0;     // eps eta0^+(t/eps)
  int action_evaluations = 0;
};

// inf over r of the action. Energies r > 0 use a log grid below min(r0, pruning bound)
// refined by golden section; r <= 0 uses min u0 over [eps eta0^-, eps eta0^+].
HomogenizationResult u_eps(const Potential& P, const InitialData& u0, double x, double t, double eps,
                           const QuadratureSpec& spec, const UepsOptions& opt = {});

// min_y t Lbar((x - y)/t) + u0(y).
double u_hom(const EffectiveModel& M, const InitialData& u0, double x, double t);

struct FdOptions {
  double dx = 1e-3;
  double cfl = 0.5;
  double half_width = 0.0;  // 0 selects fd_default_half_width
};

struct FdSolution {
  std::vector<double> x;
  std::vector<double> u;
  double t = 0.0;
  long steps = 0;
  double at(double x) const;  // linear interpolation
};

// Godunov scheme for u_t + |u_x|^2 / 2 + V(x / eps) = 0 on [-X, X] with constant
// extrapolation at the boundary and time steps from the current maximal gradient.
FdSolution fd_viscosity_solve(const Potential& P, const InitialData& u0, double eps, double t_final,
                              const FdOptions& opt, const std::vector<double>& report_points);
// max |x_i| + min(sqrt(2 t osc u0), t sqrt(2 (r0 + |U|_inf))) + 0.5 + 2 eps.
double fd_default_half_width(const Potential& P, const InitialData& u0, double t,
                             const std::vector<double>& report_points);

struct SweepConfig {
  explicit SweepConfig(Potential P) : potential(std::move(P)) {}

  Potential potential;
  InitialData u0 = InitialData::cone();
  std::vector<double> epsilons;
  std::vector<double> points{-1.0, -0.5, 0.0, 0.5, 1.0};
  double t = 1.0;
  QuadratureSpec quad;
  EffectiveOptions effective;
  UepsOptions search;
};

struct SweepRow {
  double epsilon = 0.0;
  double x = 0.0;
  double u_eps = 0.0;
  double u_hom = 0.0;
  double error = 0.0;
  double r_star = 0.0;
  ActionBranch branch = ActionBranch::nonpositive;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<double> epsilons;
  std::vector<double> errors;  // e(eps) = max over points
  RateFit fit;                 // power law, or reciprocal-log for gamma = 2
  std::string regime;
  double predicted_upper = std::numeric_limits<double>::quiet_NaN();
  double predicted_lower = std::numeric_limits<double>::quiet_NaN();
  bool nonincreasing = false;  // up to 10% noise
};

SweepResult rate_sweep(const SweepConfig& config);
SweepResult rate_sweep(const SweepConfig& config, const EffectiveModel& M);

// Exponents of the rate tables: upper (gamma - 2)/(3 gamma - 2) for gamma > 2 (NaN
// otherwise); lower 1, 1/2 or gamma/(gamma + 1).
double predicted_upper_exponent(double gamma);
double predicted_lower_exponent(double gamma);

}  // namespace hjqp
