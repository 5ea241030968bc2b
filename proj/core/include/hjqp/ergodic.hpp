#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hjqp/quad.hpp"
#include "hjqp/rate_fit.hpp"
#include "hjqp/torus.hpp"

namespace hjqp {

// A continuous function on T^n with the regularity data used to bound its modulus.
struct Observable {
  TorusObservable F;
  std::size_t dim = 2;
  std::string tag;
  double lipschitz = std::numeric_limits<double>::infinity();  // sup |grad F|
  double hessian = std::numeric_limits<double>::infinity();    // sup |D^2 F|
  // Hoelder data, used when lipschitz is infinite: |F(x) - F(y)| <= C |x - y|^alpha.
  double holder_constant = std::numeric_limits<double>::infinity();
  double holder_exponent = 1.0;
  // Coordinates F depends on; empty means all.
  std::vector<bool> active;
};

Observable constant_observable(double c, std::size_t dim = 2);
// cos(2 pi k.x) (phase = 0) or sin(2 pi k.x) (phase = 1).
Observable single_mode_observable(std::vector<int> k, int phase = 0);
// sum_i sin(2 pi x_i).
Observable sum_of_sines_observable(std::size_t dim = 2);
// sqrt(U) (scale = 1) or sqrt(2 U) (scale = 2) for a prototype or trig-polynomial suspension.
Observable sqrt_u_observable(const Suspension& U, double scale = 1.0);

struct ErgodicReport {
  std::string tag;
  std::optional<double> mean_value;  // unset when the torus integral diverges
  std::vector<double> T;
  std::vector<double> value;  // Birkhoff average at T
  std::vector<double> error;  // quantity entering the fit
  RateFit fit;
  bool saturated = false;  // some errors fell below the 1e-12 floor and were dropped
  double target_exponent = std::numeric_limits<double>::quiet_NaN();
};

// (1/T) int_0^T F(xi x) dx.
double birkhoff_average(const TorusObservable& F, const Frequency& xi, double T, const QuadratureSpec& spec);

// Error at T is max_{s in [T, 2T]} |avg(s) - mean| sampled at orbit panel ends, so that
// zero crossings of the oscillating error do not enter the log-log fit. When mean is
// unset it is computed as the torus integral of F (n = 2).
ErgodicReport birkhoff_rate_experiment(const Observable& F, const Frequency& xi, const std::vector<double>& T_grid,
                                       const QuadratureSpec& spec, std::optional<double> mean = {});

// Direct form of the Fourier estimate: sum_{0<|k|<=N} |F_k| / (pi |xi.k|), the constant
// multiplying 1/T, from a DFT on a grid of size at least 2N + 2.
double fourier_rate_sum(const Observable& F, const Frequency& xi, int N);
// Cauchy-Schwarz form with a Diophantine pair:
// (1/(pi C)) (sum |k|^{-(n+s)})^{1/2} (sum |k|^{n+s+2 sigma} |F_k|^2)^{1/2}, 0 < |k| <= N.
// Requires s > n/2 + sigma (hypothesis_failed otherwise).
double fourier_rate_bound(const Observable& F, const Frequency& xi, double s, int N, double sigma, double C);

// int_T2 U^{-1/2}; throws DivergenceSuspected when the integral diverges.
double torus_inv_sqrt_integral(const Suspension& U, const QuadratureSpec& spec);

// Averages (1/T) int_a^{a+T} U(xi x)^{-1/2} dx. The start a defaults to 0 under (A1) and
// 1/2 under (A2), away from the pole at the origin.
//   gamma < 2: decay of max_{s in [T,2T]} |avg(s) - mean| to the torus integral.
//   gamma = 2: log-law fit of avg against log T.
//   gamma > 2: power-law growth of avg against T.
ErgodicReport unbounded_mean_experiment(const Potential& P, const std::vector<double>& T_grid,
                                        const QuadratureSpec& spec, std::optional<double> start = {});
// Exponents from the unbounded mean table: decay rate for gamma < 2, growth rate for gamma > 2.
double unbounded_mean_target(double gamma);

// Integer shifts l in [a, a + W], l != 0, are tested in increasing order. A shift is
// accepted when max |F(y + xi l) - F(y)| over 10^4 stratified torus samples plus the
// modulus margin of the difference is below eps. Returns nullopt when none qualifies.
std::optional<double> epsilon_period_search(const Observable& F, const Frequency& xi, double eps, double a,
                                            double W, unsigned seed = 1);
// Same, throwing not_found.
double epsilon_period(const Observable& F, const Frequency& xi, double eps, double a, double W,
                      unsigned seed = 1);

struct InclusionEstimate {
  std::vector<double> eps;
  std::vector<double> length;  // max over window starts of (first hit - start)
  RateFit fit;                 // log length against log(1/eps)
};

// 50 window starts a_j = j * stride; the window doubles from 16 up to max_window.
InclusionEstimate inclusion_length_estimate(const Observable& F, const Frequency& xi,
                                            const std::vector<double>& eps_grid, double stride = 97.0,
                                            double max_window = 1e7);
RateFit inclusion_length_fit(const Observable& F, const Frequency& xi, const std::vector<double>& eps_grid);

// {10^2, 10^2.5, ..., 10^5.5}.
std::vector<double> default_T_grid();

}  // namespace hjqp
