#include "hjqp/quad.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "hjqp/detail/integrate.hpp"

namespace hjqp {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) fail(ErrorKind::config, "quadrature tolerances must be positive");
  if (max_subdivisions < 1) fail(ErrorKind::config, "max_subdivisions must be at least 1");
  if (!(polar_refinement_radius > 0.0 && polar_refinement_radius < 0.5))
    fail(ErrorKind::config, "polar_refinement_radius must lie in (0, 0.5)");
}

QuadEstimate torus_integral_offset(const TorusFunction& f, const QuadratureSpec& spec) {
  spec.validate();
  auto g = [&f](double h1, double h2) { return gk::Vec<1>{f(h1, h2)}; };
  const auto est = detail::torus_offset<1>(g, spec);
  return {est.value[0], est.error[0], est.converged};
}

QuadEstimate torus_integral_detailed(const TorusFunction& F, const QuadratureSpec& spec,
                                     std::array<double, 2> center) {
  auto g = [&](double h1, double h2) { return F(frac(center[0] + h1), frac(center[1] + h2)); };
  return torus_integral_offset(g, spec);
}

double torus_integral(const TorusFunction& F, const QuadratureSpec& spec, std::array<double, 2> center) {
  return torus_integral_detailed(F, spec, center).value;
}

double orbit_panel_length(const Frequency& xi) { return std::min(0.25, 1.0 / xi.norm()); }

double line_integral_sqrt(const Potential& P, double mu, double a, double b, const QuadratureSpec& spec) {
  if (a > b) fail(ErrorKind::config, "line integral requires a <= b");
  if (mu < 0.0) fail(ErrorKind::config, "line integral requires mu >= 0");
  auto k = [&P, mu](double b, double t) { return gk::Vec<1>{std::sqrt(2.0 * (mu + P.U_along(b, t)))}; };
  return detail::along<1>(k, a, b, orbit_panel_length(P.frequency()), spec).value[0];
}

double line_integral_inv_sqrt(const Potential& P, double r, double a, double b, const QuadratureSpec& spec) {
  if (a > b) fail(ErrorKind::config, "line integral requires a <= b");
  if (P.has_pole(r, a, b)) fail(ErrorKind::singular_interval, "r - V vanishes inside the interval");
  auto k = [&P, r](double b, double t) { return gk::Vec<1>{1.0 / std::sqrt(2.0 * (r + P.U_along(b, t)))}; };
  return detail::along<1>(k, a, b, orbit_panel_length(P.frequency()), spec).value[0];
}

QuadEstimate line_integral_orbit(const Frequency& xi, const TorusObservable& F, double a, double b,
                                 const QuadratureSpec& spec) {
  const auto& c = xi.components();
  std::vector<double> y(c.size());
  auto k = [&](double b, double t) {
    for (std::size_t i = 0; i < c.size(); ++i) y[i] = orbit_phase(c[i], b, t);
    return gk::Vec<1>{F(y.data())};
  };
  const auto est = detail::along<1>(k, a, b, orbit_panel_length(xi), spec);
  return {est.value[0], est.error[0], est.converged};
}

std::complex<double> FourierGrid::at(int k1, int k2) const {
  const int i = ((k1 % N) + N) % N;
  const int j = ((k2 % N) + N) % N;
  return coeff[std::size_t(i) * N + j];
}

FourierGrid fourier_grid(const TorusFunction& f, int N) {
  if (N < 2 || (N & (N - 1)) != 0) fail(ErrorKind::config, "DFT size must be a power of two");
  static std::mutex plan_mutex;
  const std::size_t NN = std::size_t(N) * N;
  fftw_complex* in = fftw_alloc_complex(NN);
  fftw_complex* out = fftw_alloc_complex(NN);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan = fftw_plan_dft_2d(N, N, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      in[std::size_t(i) * N + j][0] = f(double(i) / N, double(j) / N);
      in[std::size_t(i) * N + j][1] = 0.0;
    }
  }
  fftw_execute(plan);
  FourierGrid g;
  g.N = N;
  g.coeff.resize(NN);
  const double scale = 1.0 / double(NN);
  for (std::size_t q = 0; q < NN; ++q) g.coeff[q] = {out[q][0] * scale, out[q][1] * scale};
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return g;
}

double sobolev_norm(const FourierGrid& g, double s) {
  if (s < 0.0) fail(ErrorKind::config, "Sobolev order must be nonnegative");
  const int N = g.N;
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    const int k1 = FourierGrid::mode(i, N);
    for (int j = 0; j < N; ++j) {
      const int k2 = FourierGrid::mode(j, N);
      const double w = std::pow(1.0 + double(k1) * k1 + double(k2) * k2, s);
      sum += w * std::norm(g.coeff[std::size_t(i) * N + j]);
    }
  }
  return std::sqrt(sum);
}

double sobolev_norm(const TorusFunction& f, double s, int N) {
  if (N < 64) fail(ErrorKind::config, "Sobolev mode cutoff must be at least 64");
  return sobolev_norm(fourier_grid(f, N), s);
}

double sobolev_norm(const Suspension& U, double s, int N, SobolevTarget target) {
  if (U.dim() != 2) fail(ErrorKind::config, "Sobolev norm is implemented on the 2-torus");
  auto f = [&U, target](double x1, double x2) {
    const double x[2] = {x1, x2};
    const double v = std::max(U.value(x), 0.0);
    return target == SobolevTarget::sqrt_u ? std::sqrt(v) : v;
  };
  return sobolev_norm(f, s, N);
}

}  // namespace hjqp
