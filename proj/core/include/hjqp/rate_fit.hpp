#pragma once

#include <span>
#include <string>
#include <vector>

namespace hjqp {

enum class FitModel {
  power_law,          // log y = log_constant + exponent * log x
  log_law,            // y = log_constant + exponent * log x
  reciprocal_log_law  // y = log_constant + exponent / log x
};

std::string to_string(FitModel m);

struct RateFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  double r_squared = 0.0;
  FitModel model = FitModel::power_law;
  int sample_count = 0;

  // Positive for decaying power laws.
  double decay_rate() const noexcept { return -exponent; }
};

// Least squares fits; at least four samples. Power-law fits need y > 0 (flat_fit otherwise).
RateFit fit_power_law(std::span<const double> x, std::span<const double> y);
RateFit fit_log_law(std::span<const double> x, std::span<const double> y);
RateFit fit_reciprocal_log_law(std::span<const double> x, std::span<const double> y);

std::vector<double> geometric_grid(double lo, double hi, int points);

}  // namespace hjqp
