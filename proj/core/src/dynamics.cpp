#include "hjqp/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "hjqp/detail/march.hpp"
#include "hjqp/ergodic.hpp"

namespace hjqp {

namespace {

constexpr double kFlatFloor = 1e-10;

auto time_kernel(const Potential& P, double r) {
  return [&P, r](double b, double t) { return gk::Vec<1>{1.0 / std::sqrt(2.0 * (r + P.U_along(b, t)))}; };
}

void check_characteristic(const Characteristic& c) {
  if (!(c.r >= 0.0) || !std::isfinite(c.r))
    fail(ErrorKind::config, "characteristics need a finite energy r >= 0");
  if (c.r == 0.0 && c.potential.U_along(c.x0) == 0.0)
    fail(ErrorKind::stationary, "eta stays at the equilibrium x0");
}

void check_grid(const std::vector<double>& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!(s[i] >= 0.0) || (i > 0 && !(s[i] > s[i - 1]))) fail(ErrorKind::config, "time grid must be nonnegative and increasing");
}

// The path may approach an equilibrium (r = 0 at a zero of U) only in infinite time.
void check_pole(const Characteristic& c, double a, double b) {
  if (c.potential.has_pole(c.r, std::min(a, b), std::max(a, b)))
    fail(ErrorKind::singular_interval, "characteristic reaches a zero of r - V");
}

}  // namespace

std::vector<double> characteristic_path(const Characteristic& c, const std::vector<double>& s_grid,
                                        const QuadratureSpec& spec) {
  spec.validate();
  check_characteristic(c);
  check_grid(s_grid);
  const double dir = c.branch == Branch::plus ? 1.0 : -1.0;
  const double h = orbit_panel_length(c.potential.frequency());
  detail::OrbitMarch<1, decltype(time_kernel(c.potential, c.r))> march(time_kernel(c.potential, c.r), c.x0, dir, h,
                                                                       spec);
  std::vector<double> out;
  for (double s : s_grid) {
    if (s == 0.0) {
      out.push_back(c.x0);
      continue;
    }
    const double tol = 1e-10 * std::max(1.0, s);
    while (march.total()[0] + march.panel()[0] < s) {
      check_pole(c, march.base(), march.base() + dir * march.panel_length());
      march.step();
    }
    check_pole(c, march.base(), march.base() + dir * march.panel_length());
    out.push_back(march.hit(s, tol).x);
  }
  return out;
}

double characteristic_endpoint(const Characteristic& c, double s, const QuadratureSpec& spec) {
  if (!(s >= 0.0)) fail(ErrorKind::config, "time must be nonnegative");
  return characteristic_path(c, {s}, spec).front();
}

double velocity_average_target(double gamma) {
  if (gamma > 2.0) return (gamma - 2.0) / (3.0 * gamma - 2.0);
  if (gamma == 2.0) return 0.0;
  if (gamma >= 1.0) return (2.0 - gamma) / (2.0 * (2.0 + gamma));
  if (gamma > 2.0 / 3.0) return gamma * (2.0 - gamma) / ((1.0 + gamma) * (2.0 + gamma));
  return 0.5 * gamma / (1.0 + gamma);
}

double critical_velocity_target(double gamma) { return unbounded_mean_target(gamma); }

std::vector<double> default_t_grid() { return geometric_grid(1e2, 1e5, 8); }

VelocityAverage velocity_average(const EffectiveModel& M, double p, const std::vector<double>& t_grid) {
  if (t_grid.size() < 4) fail(ErrorKind::config, "velocity fit needs at least four times");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
      fail(ErrorKind::config, "time grid must be positive and increasing");
  const double a = std::abs(p);
  if (a < M.p0() * (1.0 - 1e-14)) fail(ErrorKind::config, "characteristics need |p| >= p0");
  const auto& P = M.potential();
  const auto& spec = M.quad_spec();
  const bool edge = a <= M.p0();

  VelocityAverage out;
  out.p = p;
  out.r = edge ? 0.0 : M.H(p);
  out.limit = edge ? M.right_derivative_at_p0() : std::abs(M.H_prime(p));
  const auto& U = P.suspension();
  if (U.kind() != SuspensionKind::trig_polynomial) out.target = velocity_average_target(U.gamma());

  const double dir = p < 0.0 ? -1.0 : 1.0;
  Characteristic c{P, out.r, p < 0.0 ? Branch::minus : Branch::plus, 0.0};
  check_characteristic(c);
  detail::OrbitMarch<1, decltype(time_kernel(P, out.r))> march(time_kernel(P, out.r), 0.0, dir,
                                                               orbit_panel_length(P.frequency()), spec);
  std::vector<double> ps, px;  // (time, position) at panel ends
  const double horizon = 2.0 * t_grid.back();
  std::size_t next = 0;
  while (march.total()[0] < horizon) {
    const double end = march.total()[0] + march.panel()[0];
    while (next < t_grid.size() && t_grid[next] <= end) {
      out.t.push_back(t_grid[next]);
      out.eta.push_back(march.hit(t_grid[next], 1e-10 * std::max(1.0, t_grid[next])).x);
      ++next;
    }
    march.step();
    ps.push_back(march.total()[0]);
    px.push_back(march.base());
  }
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const double t = out.t[i];
    double e = std::abs(std::abs(out.eta[i]) / t - out.limit);
    auto lo = std::lower_bound(ps.begin(), ps.end(), t);
    auto hi = std::upper_bound(ps.begin(), ps.end(), 2.0 * t);
    for (auto it = lo; it != hi; ++it) {
      const std::size_t k = std::size_t(it - ps.begin());
      e = std::max(e, std::abs(std::abs(px[k]) / ps[k] - out.limit));
    }
    out.error.push_back(e);
  }
  out.flat = std::all_of(out.error.begin(), out.error.end(), [](double e) { return e < kFlatFloor; });
  if (out.flat) return out;
  const bool log_model = U.kind() != SuspensionKind::trig_polynomial && U.gamma() == 2.0 && edge;
  out.fit = log_model ? fit_reciprocal_log_law(out.t, out.error) : fit_power_law(out.t, out.error);
  return out;
}

RateFit velocity_average_rate(const EffectiveModel& M, double p, const std::vector<double>& t_grid) {
  const auto v = velocity_average(M, p, t_grid);
  if (v.flat) fail(ErrorKind::flat_fit, "velocity error is below the 1e-10 floor");
  return v.fit;
}

RateFit critical_velocity_rate(const EffectiveModel& M, const std::vector<double>& t_grid) {
  const auto& U = M.potential().suspension();
  if (U.kind() == SuspensionKind::trig_polynomial || !(U.gamma() > 2.0))
    fail(ErrorKind::config, "critical velocity rate needs a prototype with gamma > 2");
  return velocity_average_rate(M, M.p0(), t_grid);
}

}  // namespace hjqp
