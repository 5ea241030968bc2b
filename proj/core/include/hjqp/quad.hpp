#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "hjqp/torus.hpp"

namespace hjqp {

struct QuadratureSpec {
  double abs_tol = 1e-12;  // for line integrals: per unit length of the interval
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;  // interval budget of each one-dimensional adaptive pass
  double polar_refinement_radius = 0.15;

  void validate() const;
};

struct QuadEstimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// f(x1, x2) on the torus; arguments may lie outside [0,1) and are reduced by the caller.
using TorusFunction = std::function<double(double, double)>;

// Integral over T^2 of a function given in offset form: f(h) = F(center + h),
// h in [-1/2, 1/2)^2. The square |h|_inf <= polar_refinement_radius is integrated in
// polar coordinates with a logarithmic radial variable. The radial range is doubled
// until the increments are below tolerance; partial sums growing by more than 10% for
// six consecutive doublings raise DivergenceSuspected.
QuadEstimate torus_integral_offset(const TorusFunction& f, const QuadratureSpec& spec);

// Integral of F over T^2, refined around center.
double torus_integral(const TorusFunction& F, const QuadratureSpec& spec,
                      std::array<double, 2> center = {0.0, 0.0});
QuadEstimate torus_integral_detailed(const TorusFunction& F, const QuadratureSpec& spec,
                                     std::array<double, 2> center = {0.0, 0.0});

// Panel length used along orbits xi x: min(0.25, 1/|xi|).
double orbit_panel_length(const Frequency& xi);

// int_a^b sqrt(2 (mu + U(xi x))) dx.
double line_integral_sqrt(const Potential& P, double mu, double a, double b,
                          const QuadratureSpec& spec);
// int_a^b dx / sqrt(2 (r - V(x))); throws singular_interval when r - V vanishes on [a, b].
double line_integral_inv_sqrt(const Potential& P, double r, double a, double b,
                              const QuadratureSpec& spec);
// int_a^b F(frac(xi x)) dx for an observable on the torus.
using TorusObservable = std::function<double(const double*)>;
QuadEstimate line_integral_orbit(const Frequency& xi, const TorusObservable& F, double a, double b,
                                 const QuadratureSpec& spec);

// Discrete Fourier coefficients of a function sampled on an N x N grid.
struct FourierGrid {
  int N = 0;
  std::vector<std::complex<double>> coeff;  // row-major, index (k1 mod N, k2 mod N)
  std::complex<double> at(int k1, int k2) const;
  // Signed mode number for an FFT index.
  static int mode(int index, int N) { return index <= N / 2 ? index : index - N; }
};

FourierGrid fourier_grid(const TorusFunction& f, int N);

enum class SobolevTarget { sqrt_u, u };

// (sum_{|k|_inf <= N/2} (1 + |k|^2)^s |f_k|^2)^{1/2} with DFT coefficients on an N x N grid.
double sobolev_norm(const TorusFunction& f, double s, int N);
double sobolev_norm(const Suspension& U, double s, int N, SobolevTarget target = SobolevTarget::sqrt_u);
double sobolev_norm(const FourierGrid& g, double s);

}  // namespace hjqp
