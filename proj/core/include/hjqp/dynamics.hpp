#pragma once

#include <limits>
#include <vector>

#include "hjqp/effective.hpp"
#include "hjqp/quad.hpp"
#include "hjqp/rate_fit.hpp"
#include "hjqp/torus.hpp"

namespace hjqp {

enum class Branch { plus, minus };

// Trajectory of |eta'| = sqrt(2 (r - V(eta))) with eta(0) = x0.
struct Characteristic {
  Potential potential;
  double r = 0.0;
  Branch branch = Branch::plus;
  double x0 = 0.0;
};

// eta(s), the y with int_{x0}^{y} dx / sqrt(2 (r - V)) = s along the branch. Time
// residual at most 1e-8 max(1, s). Requires r >= 0; r = 0 at a zero of U is stationary.
double characteristic_endpoint(const Characteristic& c, double s, const QuadratureSpec& spec);
// eta at every time of an increasing grid, in one pass.
std::vector<double> characteristic_path(const Characteristic& c, const std::vector<double>& s_grid,
                                        const QuadratureSpec& spec);

struct VelocityAverage {
  double p = 0.0;
  double r = 0.0;
  double limit = 0.0;  // H'(p), one-sided at p0
  std::vector<double> t;
  std::vector<double> eta;
  std::vector<double> error;  // max_{s in [t, 2t]} |eta(s)/s - limit| at panel ends
  RateFit fit;
  bool flat = false;  // every error below the 1e-10 floor
  double target = std::numeric_limits<double>::quiet_NaN();
};

// Characteristic with respect to p >= p0: energy r = H(p), branch sign(p), start 0.
// gamma = 2 edge cases use the reciprocal-log model; everything else a power law.
VelocityAverage velocity_average(const EffectiveModel& M, double p, const std::vector<double>& t_grid);
RateFit velocity_average_rate(const EffectiveModel& M, double p, const std::vector<double>& t_grid);
// p = p0 with gamma > 2: fit of |eta0(t)/t| against t.
RateFit critical_velocity_rate(const EffectiveModel& M, const std::vector<double>& t_grid);

// Predicted decay of |eta0(t)/t - H'(p0)| under (A1); 0 stands for the logarithmic case.
double velocity_average_target(double gamma);
// (gamma - 2)(3 gamma - 2) / ((gamma - 2)(3 gamma - 2) + 4 gamma^2).
double critical_velocity_target(double gamma);

// {10^2, ..., 10^5}, 8 geometric points.
std::vector<double> default_t_grid();

}  // namespace hjqp
