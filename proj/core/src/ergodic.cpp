#include "hjqp/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hjqp/detail/integrate.hpp"

namespace hjqp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFloor = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cumulative {
  std::vector<double> s;  // offsets from the start
  std::vector<double> I;  // integral over [start, start + s]
};

// Integrates kernel(base, t) over [start, start + length], recording the running integral at
// every orbit panel end and at each requested mark.
template <class K>
Cumulative march(K&& kernel, double start, double length, double h, std::vector<double> marks,
                 const QuadratureSpec& spec) {
  std::sort(marks.begin(), marks.end());
  Cumulative c;
  c.s.push_back(0.0);
  c.I.push_back(0.0);
  double s = 0.0, I = 0.0;
  std::size_t m = 0;
  while (s < length) {
    double next = std::min(length, std::floor(s / h + 1.0) * h);
    while (m < marks.size() && marks[m] <= s) ++m;
    if (m < marks.size() && marks[m] < next) next = marks[m];
    const double base = start + s;
    auto f = [&](double t) { return gk::Vec<1>{kernel(base, t)}; };
    const auto r = gk::adaptive<1>(f, 0.0, next - s, spec.abs_tol * (next - s), spec.rel_tol, spec.max_subdivisions);
    if (!r.converged)
      fail(ErrorKind::numerical, "orbit quadrature exhausted its subdivision budget on [" +
                                     std::to_string(start + s) + ", " + std::to_string(start + next) + "]");
    I += r.value[0];
    s = next;
    c.s.push_back(s);
    c.I.push_back(I);
  }
  return c;
}

double value_at(const Cumulative& c, double s) {
  auto it = std::lower_bound(c.s.begin(), c.s.end(), s);
  return c.I[std::size_t(it - c.s.begin())];
}

double envelope_error(const Cumulative& c, double T, double mean) {
  auto lo = std::lower_bound(c.s.begin(), c.s.end(), T);
  auto hi = std::upper_bound(c.s.begin(), c.s.end(), 2.0 * T);
  double e = 0.0;
  for (auto it = lo; it != hi; ++it) {
    const std::size_t i = std::size_t(it - c.s.begin());
    e = std::max(e, std::abs(c.I[i] / c.s[i] - mean));
  }
  return e;
}

void check_grid(const std::vector<double>& T) {
  if (T.size() < 4) fail(ErrorKind::config, "T grid needs at least four points");
  for (std::size_t i = 0; i < T.size(); ++i)
    if (!(T[i] > 0.0) || (i > 0 && !(T[i] > T[i - 1]))) fail(ErrorKind::config, "T grid must be positive and increasing");
}

std::vector<double> marks_for(const std::vector<double>& T) {
  std::vector<double> m;
  for (double t : T) {
    m.push_back(t);
    m.push_back(2.0 * t);
  }
  return m;
}

void fit_errors(ErgodicReport& rep) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < rep.T.size(); ++i) {
    if (rep.error[i] < kFloor) {
      rep.saturated = true;
      continue;
    }
    x.push_back(rep.T[i]);
    y.push_back(rep.error[i]);
  }
  if (x.size() >= 4) rep.fit = fit_power_law(x, y);
}

double torus_mean(const Observable& F, const QuadratureSpec& spec) {
  if (F.dim != 2) fail(ErrorKind::config, "torus mean is implemented on the 2-torus; pass the mean explicitly");
  auto f = [&F](double x1, double x2) {
    const double x[2] = {frac(x1), frac(x2)};
    return F.F(x);
  };
  return torus_integral(f, spec);
}

}  // namespace

Observable constant_observable(double c, std::size_t dim) {
  Observable o;
  o.F = [c](const double*) { return c; };
  o.dim = dim;
  o.tag = "constant";
  o.lipschitz = 0.0;
  o.hessian = 0.0;
  o.active.assign(dim, false);
  return o;
}

Observable single_mode_observable(std::vector<int> k, int phase) {
  if (k.size() < 2) fail(ErrorKind::config, "mode needs at least two components");
  double norm = 0.0;
  for (int v : k) norm += double(v) * v;
  norm = std::sqrt(norm);
  Observable o;
  o.dim = k.size();
  o.tag = phase == 0 ? "cos-mode" : "sin-mode";
  o.F = [k, phase](const double* x) {
    double ph = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) ph += double(k[i]) * x[i];
    return phase == 0 ? std::cos(2.0 * kPi * ph) : std::sin(2.0 * kPi * ph);
  };
  o.lipschitz = 2.0 * kPi * norm;
  o.hessian = 4.0 * kPi * kPi * norm * norm;
  for (int v : k) o.active.push_back(v != 0);
  return o;
}

Observable sum_of_sines_observable(std::size_t dim) {
  Observable o;
  o.dim = dim;
  o.tag = "sum-of-sines";
  o.F = [dim](const double* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += std::sin(2.0 * kPi * x[i]);
    return s;
  };
  o.lipschitz = 2.0 * kPi * std::sqrt(double(dim));
  o.hessian = 4.0 * kPi * kPi;
  return o;
}

Observable sqrt_u_observable(const Suspension& U, double scale) {
  Observable o;
  o.dim = U.dim();
  o.tag = scale == 1.0 ? "sqrt-u" : "sqrt-scaled-u";
  o.F = [U, scale](const double* x) { return std::sqrt(scale * std::max(U.value(x), 0.0)); };
  if (U.kind() != SuspensionKind::trig_polynomial) {
    // sqrt U = (sqrt U0)^gamma with sqrt U0 Lipschitz (constant sqrt2 pi) and bounded by 2.
    const double g = U.gamma();
    const double L0 = std::sqrt(2.0) * kPi;
    const double c = std::sqrt(scale);
    if (g >= 1.0) {
      o.lipschitz = c * g * std::pow(2.0, g - 1.0) * L0;
    } else {
      o.holder_constant = c * std::pow(L0, g);
      o.holder_exponent = g;
    }
  } else {
    o.holder_constant = std::sqrt(scale * U.lipschitz_bound());
    o.holder_exponent = 0.5;
  }
  return o;
}

double birkhoff_average(const TorusObservable& F, const Frequency& xi, double T, const QuadratureSpec& spec) {
  if (!(T > 0.0)) fail(ErrorKind::config, "averaging length must be positive");
  return line_integral_orbit(xi, F, 0.0, T, spec).value / T;
}

std::vector<double> default_T_grid() {
  std::vector<double> T;
  for (int i = 0; i <= 7; ++i) T.push_back(std::pow(10.0, 2.0 + 0.5 * i));
  return T;
}

ErgodicReport birkhoff_rate_experiment(const Observable& F, const Frequency& xi, const std::vector<double>& T_grid,
                                       const QuadratureSpec& spec, std::optional<double> mean) {
  check_grid(T_grid);
  if (F.dim != xi.dim()) fail(ErrorKind::config, "observable and frequency dimensions differ");
  ErgodicReport rep;
  rep.tag = F.tag;
  rep.mean_value = mean ? *mean : torus_mean(F, spec);
  const auto& c = xi.components();
  std::vector<double> y(c.size());
  auto kernel = [&](double b, double t) {
    for (std::size_t i = 0; i < c.size(); ++i) y[i] = orbit_phase(c[i], b, t);
    return F.F(y.data());
  };
  const auto cum = march(kernel, 0.0, 2.0 * T_grid.back(), orbit_panel_length(xi), marks_for(T_grid), spec);
  for (double T : T_grid) {
    rep.T.push_back(T);
    rep.value.push_back(value_at(cum, T) / T);
    rep.error.push_back(envelope_error(cum, T, *rep.mean_value));
  }
  fit_errors(rep);
  return rep;
}

double fourier_rate_sum(const Observable& F, const Frequency& xi, int N) {
  if (F.dim != 2 || xi.dim() != 2) fail(ErrorKind::config, "Fourier rate sum is implemented on the 2-torus");
  if (N < 1) fail(ErrorKind::config, "mode cutoff must be positive");
  int G = 8;
  while (G < 2 * N + 2) G *= 2;
  const auto grid = fourier_grid(
      [&F](double a, double b) {
        const double x[2] = {a, b};
        return F.F(x);
      },
      G);
  double sum = 0.0;
  for (int k1 = -N; k1 <= N; ++k1) {
    for (int k2 = -N; k2 <= N; ++k2) {
      if ((k1 == 0 && k2 == 0) || double(k1) * k1 + double(k2) * k2 > double(N) * N) continue;
      const double a = std::abs(grid.at(k1, k2));
      if (a == 0.0) continue;
      const double dot = std::abs(k1 * xi[0] + k2 * xi[1]);
      if (dot == 0.0) fail(ErrorKind::resonant_frequency, "frequency is resonant on the observable's support");
      sum += a / (kPi * dot);
    }
  }
  return sum;
}

double fourier_rate_bound(const Observable& F, const Frequency& xi, double s, int N, double sigma, double C) {
  const double n = double(xi.dim());
  if (!(C > 0.0)) fail(ErrorKind::config, "Diophantine constant must be positive");
  if (!(s > n / 2.0 + sigma)) fail(ErrorKind::hypothesis_failed, "Sobolev order must exceed n/2 + sigma");
  if (F.dim != 2 || xi.dim() != 2) fail(ErrorKind::config, "Fourier rate bound is implemented on the 2-torus");
  if (N < 1) fail(ErrorKind::config, "mode cutoff must be positive");
  int G = 8;
  while (G < 2 * N + 2) G *= 2;
  const auto grid = fourier_grid(
      [&F](double a, double b) {
        const double x[2] = {a, b};
        return F.F(x);
      },
      G);
  double zeta = 0.0, weighted = 0.0;
  for (int k1 = -N; k1 <= N; ++k1) {
    for (int k2 = -N; k2 <= N; ++k2) {
      const double k2norm = double(k1) * k1 + double(k2) * k2;
      if (k2norm == 0.0 || k2norm > double(N) * N) continue;
      const double kn = std::sqrt(k2norm);
      zeta += std::pow(kn, -(n + s));
      weighted += std::pow(kn, n + s + 2.0 * sigma) * std::norm(grid.at(k1, k2));
    }
  }
  return std::sqrt(zeta) * std::sqrt(weighted) / (kPi * C);
}

double torus_inv_sqrt_integral(const Suspension& U, const QuadratureSpec& spec) {
  if (U.dim() != 2) fail(ErrorKind::config, "torus integral is implemented on the 2-torus");
  spec.validate();
  auto f = [&U](double h1, double h2) {
    const double h[2] = {h1, h2};
    return gk::Vec<1>{1.0 / std::sqrt(U.value_offset(h))};
  };
  return detail::torus_offset<1>(f, spec).value[0];
}

double unbounded_mean_target(double gamma) {
  if (gamma < 2.0) return 0.5 * (2.0 - gamma) / (2.0 + gamma);
  if (gamma == 2.0) return 0.0;
  const double a = (gamma - 2.0) * (3.0 * gamma - 2.0);
  return a / (a + 4.0 * gamma * gamma);
}

ErgodicReport unbounded_mean_experiment(const Potential& P, const std::vector<double>& T_grid,
                                        const QuadratureSpec& spec, std::optional<double> start) {
  const auto& U = P.suspension();
  if (U.kind() == SuspensionKind::trig_polynomial) fail(ErrorKind::config, "unbounded mean needs a prototype potential");
  check_grid(T_grid);
  const double g = U.gamma();
  const double a = start ? *start : (U.kind() == SuspensionKind::prototype_a2 ? 0.5 : 0.0);
  if (U.kind() == SuspensionKind::prototype_a2 && a <= 0.0 && a + 2.0 * T_grid.back() >= 0.0)
    fail(ErrorKind::singular_interval, "averaging window contains the pole at the origin");

  ErgodicReport rep;
  rep.tag = "inv-sqrt-u";
  rep.target_exponent = unbounded_mean_target(g);
  if (g < 2.0) {
    try {
      rep.mean_value = torus_inv_sqrt_integral(U, spec);
    } catch (const DivergenceSuspected&) {
    }
  }
  auto kernel = [&P](double b, double t) { return 1.0 / std::sqrt(P.U_along(b, t)); };
  const double length = g < 2.0 ? 2.0 * T_grid.back() : T_grid.back();
  const auto cum = march(kernel, a, length, orbit_panel_length(P.frequency()), marks_for(T_grid), spec);
  for (double T : T_grid) {
    rep.T.push_back(T);
    rep.value.push_back(value_at(cum, T) / T);
  }
  if (g < 2.0 && rep.mean_value) {
    for (double T : T_grid) rep.error.push_back(envelope_error(cum, T, *rep.mean_value));
    fit_errors(rep);
  } else if (g == 2.0) {
    rep.error = rep.value;
    rep.fit = fit_log_law(rep.T, rep.value);
  } else {
    rep.error = rep.value;
    rep.fit = fit_power_law(rep.T, rep.value);
  }
  return rep;
}

namespace {

// Bound on sup |g(y) - g(y')| for |y - y'| <= reach, g(y) = F(y + d) - F(y).
double difference_margin(const Observable& F, double reach, double dnorm) {
  if (std::isfinite(F.lipschitz)) {
    double slope = 2.0 * F.lipschitz;
    if (std::isfinite(F.hessian)) slope = std::min(slope, F.hessian * dnorm);
    return slope * reach;
  }
  if (std::isfinite(F.holder_constant)) return 2.0 * F.holder_constant * std::pow(reach, F.holder_exponent);
  return kInf;
}

struct Sampler {
  std::vector<double> pts;  // row-major, dim per point
  std::size_t dim = 0;
  std::size_t count = 0;
  double reach = 0.0;
};

Sampler stratified(std::size_t dim, unsigned seed) {
  Sampler S;
  S.dim = dim;
  const int m = std::max(2, int(std::lround(std::pow(1e4, 1.0 / double(dim)))));
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) total *= std::size_t(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  S.pts.resize(total * dim);
  std::vector<int> idx(dim, 0);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t q = p;
    for (std::size_t i = 0; i < dim; ++i) {
      idx[i] = int(q % std::size_t(m));
      q /= std::size_t(m);
      S.pts[p * dim + i] = (idx[i] + u(rng)) / m;
    }
  }
  S.count = total;
  S.reach = std::sqrt(double(dim)) / m;
  return S;
}

}  // namespace

std::optional<double> epsilon_period_search(const Observable& F, const Frequency& xi, double eps, double a,
                                            double W, unsigned seed) {
  if (!(eps > 0.0) || !(W > 0.0)) fail(ErrorKind::config, "epsilon period search needs eps > 0 and W > 0");
  if (F.dim != xi.dim()) fail(ErrorKind::config, "observable and frequency dimensions differ");
  const auto S = stratified(F.dim, seed);
  const std::size_t n = F.dim;
  std::vector<double> d(n), shifted(n);
  const long l0 = long(std::ceil(a));
  const long l1 = long(std::floor(a + W));
  for (long l = l0; l <= l1; ++l) {
    if (l == 0) continue;
    double dn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = F.active.empty() || F.active[i] ? frac(xi[i] * double(l)) : 0.0;
      const double r = d[i] > 0.5 ? d[i] - 1.0 : d[i];
      dn += r * r;
    }
    const double margin = difference_margin(F, S.reach, std::sqrt(dn));
    if (!(margin < eps)) continue;
    const double limit = eps - margin;
    bool ok = true;
    for (std::size_t p = 0; p < S.count && ok; ++p) {
      const double* y = &S.pts[p * n];
      for (std::size_t i = 0; i < n; ++i) shifted[i] = frac(y[i] + d[i]);
      if (std::abs(F.F(shifted.data()) - F.F(y)) >= limit) ok = false;
    }
    if (ok) return double(l);
  }
  return std::nullopt;
}

double epsilon_period(const Observable& F, const Frequency& xi, double eps, double a, double W, unsigned seed) {
  const auto r = epsilon_period_search(F, xi, eps, a, W, seed);
  if (!r) fail(ErrorKind::not_found, "no epsilon period in the window");
  return *r;
}

InclusionEstimate inclusion_length_estimate(const Observable& F, const Frequency& xi,
                                            const std::vector<double>& eps_grid, double stride, double max_window) {
  if (eps_grid.size() < 5) fail(ErrorKind::config, "inclusion fit needs at least five eps values");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] < eps_grid[i - 1])) fail(ErrorKind::config, "eps grid must be decreasing");
  InclusionEstimate est;
  for (double eps : eps_grid) {
    double worst = 0.0;
    for (int j = 0; j < 50; ++j) {
      const double a = j * stride;
      double lo = a, W = 16.0;
      std::optional<double> hit;
      while (!hit) {
        hit = epsilon_period_search(F, xi, eps, lo, W);
        if (hit) break;
        lo += W;
        W *= 2.0;
        if (lo - a > max_window) fail(ErrorKind::not_found, "no epsilon period below the window cap");
      }
      worst = std::max(worst, *hit - a);
    }
    est.eps.push_back(eps);
    est.length.push_back(std::max(worst, 1.0));
  }
  std::vector<double> inv;
  for (double e : est.eps) inv.push_back(1.0 / e);
  est.fit = fit_power_law(inv, est.length);
  return est;
}

RateFit inclusion_length_fit(const Observable& F, const Frequency& xi, const std::vector<double>& eps_grid) {
  return inclusion_length_estimate(F, xi, eps_grid).fit;
}

}  // namespace hjqp
