#include "hjqp/homog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include <boost/math/tools/minima.hpp>

#include "hjqp/detail/march.hpp"
#include "hjqp/dynamics.hpp"
#include "hjqp/errors.hpp"

namespace hjqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Golden section on [lo, hi] down to a relative width rel_tol. Unlike Brent it reaches
// any width, which matters when the minimum sits on a kink.
template <class F>
double golden_section(const F& f, double lo, double hi, double rel_tol) {
  constexpr double g = 0.6180339887498949;
  double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
  double f1 = f(m1), f2 = f(m2);
  for (int it = 0; it < 200 && hi - lo > rel_tol * (std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - g * (hi - lo);
      f1 = f(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + g * (hi - lo);
      f2 = f(m2);
    }
  }
  return f1 <= f2 ? m1 : m2;
}

// Brent's method on [lo, hi] for smooth minima; the argument is resolved to about
// sqrt(machine epsilon).
template <class F>
double minimize(const F& f, double lo, double hi) {
  std::uintmax_t iterations = 200;
  return boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits / 2, iterations).first;
}

}  // namespace

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::affine: return "affine";
    case InitialKind::cone: return "cone";
    case InitialKind::smooth_bump: return "smooth-bump";
  }
  return "?";
}

std::string to_string(ActionBranch b) {
  switch (b) {
    case ActionBranch::plus: return "+";
    case ActionBranch::minus: return "-";
    case ActionBranch::nonpositive: return "nonpositive";
  }
  return "?";
}

InitialData InitialData::affine(double slope, double offset) {
  if (!std::isfinite(slope) || !std::isfinite(offset)) fail(ErrorKind::config, "affine data needs finite parameters");
  return InitialData(InitialKind::affine, {slope, offset});
}

InitialData InitialData::cone(double slope, double width, double center) {
  if (!std::isfinite(slope) || !(width > 0.0) || !std::isfinite(center))
    fail(ErrorKind::config, "cone data needs a finite slope, width > 0 and a finite center");
  return InitialData(InitialKind::cone, {slope, width, center});
}

InitialData InitialData::smooth_bump(double height, double width, double center) {
  if (!std::isfinite(height) || !(width > 0.0) || !std::isfinite(width) || !std::isfinite(center))
    fail(ErrorKind::config, "bump data needs a finite height, finite width > 0 and a finite center");
  return InitialData(InitialKind::smooth_bump, {height, width, center});
}

double InitialData::operator()(double y) const noexcept {
  const auto& p = params_;
  switch (kind_) {
    case InitialKind::affine: return p[0] * y + p[1];
    case InitialKind::cone: return -p[0] * std::min(std::abs(y - p[2]), p[1]);
    case InitialKind::smooth_bump: {
      const double z = (y - p[2]) / p[1];
      return p[0] * std::exp(-z * z);
    }
  }
  return 0.0;
}

double InitialData::lipschitz_constant() const noexcept {
  const auto& p = params_;
  switch (kind_) {
    case InitialKind::affine: return std::abs(p[0]);
    case InitialKind::cone: return std::abs(p[0]);
    case InitialKind::smooth_bump: return std::abs(p[0]) * std::sqrt(2.0) / p[1] * std::exp(-0.5);
  }
  return 0.0;
}

double InitialData::inf() const noexcept {
  const auto& p = params_;
  switch (kind_) {
    case InitialKind::affine: return p[0] == 0.0 ? p[1] : -kInf;
    case InitialKind::cone:
      if (p[0] <= 0.0) return 0.0;
      return std::isfinite(p[1]) ? -p[0] * p[1] : -kInf;
    case InitialKind::smooth_bump: return std::min(0.0, p[0]);
  }
  return 0.0;
}

double InitialData::sup() const noexcept {
  const auto& p = params_;
  switch (kind_) {
    case InitialKind::affine: return p[0] == 0.0 ? p[1] : kInf;
    case InitialKind::cone:
      if (p[0] >= 0.0) return 0.0;
      return std::isfinite(p[1]) ? -p[0] * p[1] : kInf;
    case InitialKind::smooth_bump: return std::max(0.0, p[0]);
  }
  return 0.0;
}

double InitialData::min_on(double a, double b) const noexcept {
  if (a > b) std::swap(a, b);
  const auto& p = params_;
  const double c = kind_ == InitialKind::affine ? 0.0 : p[2];
  const double far = std::max(std::abs(a - c), std::abs(b - c));
  const double near = (a <= c && c <= b) ? 0.0 : std::min(std::abs(a - c), std::abs(b - c));
  switch (kind_) {
    case InitialKind::affine: return std::min((*this)(a), (*this)(b));
    case InitialKind::cone: return p[0] >= 0.0 ? -p[0] * std::min(far, p[1]) : -p[0] * std::min(near, p[1]);
    case InitialKind::smooth_bump: {
      const double d = p[0] >= 0.0 ? far : near;
      return p[0] * std::exp(-(d / p[1]) * (d / p[1]));
    }
  }
  return 0.0;
}

double energy_cutoff(const InitialData& u0, const Potential& P) {
  const double C = u0.lipschitz_constant();
  const double norm = P.sup_U();
  const double c_hat = norm;
  const double s = 0.5 * (C * std::sqrt(2.0) + std::sqrt(2.0 * C * C + 4.0 * (norm + c_hat)));
  return std::max(0.0, s * s - norm);
}

namespace {

struct ActionEval {
  double value = 0.0;
  double endpoint = 0.0;  // eps y
};

auto action_kernel(const Potential& P, double r) {
  return [&P, r](double b, double t) {
    const double w = std::sqrt(2.0 * (r + P.U_along(b, t)));
    return gk::Vec<2>{1.0 / w, w};
  };
}

ActionEval evaluate_action(const Potential& P, const InitialData& u0, double r, ActionBranch branch, double x,
                           double t, double eps, const QuadratureSpec& spec) {
  if (branch == ActionBranch::nonpositive) fail(ErrorKind::config, "action_value needs the + or - branch");
  if (!(r >= 0.0) || !std::isfinite(r)) fail(ErrorKind::config, "action_value needs a finite energy r >= 0");
  if (!(t > 0.0) || !(eps > 0.0 && eps <= 1.0)) fail(ErrorKind::config, "action_value needs t > 0 and eps in (0, 1]");
  const double x0 = x / eps;
  if (r == 0.0 && P.U_along(x0) == 0.0) fail(ErrorKind::stationary, "the r = 0 trajectory is stationary at x / eps");
  const double dir = branch == ActionBranch::plus ? 1.0 : -1.0;
  const double T = t / eps;
  detail::OrbitMarch<2, decltype(action_kernel(P, r))> march(action_kernel(P, r), x0, dir,
                                                             orbit_panel_length(P.frequency()), spec);
  auto check = [&] {
    const double a = march.base(), b = a + dir * march.panel_length();
    if (P.has_pole(r, std::min(a, b), std::max(a, b)))
      fail(ErrorKind::singular_interval, "trajectory reaches a zero of r - V");
  };
  check();
  while (march.total()[0] + march.panel()[0] < T) {
    march.step();
    check();
  }
  const auto h = march.hit(T, 1e-10 * std::max(1.0, T));
  ActionEval out;
  out.endpoint = eps * h.x;
  out.value = -r * t + eps * h.integral[1] + u0(out.endpoint);
  return out;
}

// eps eta0(t / eps) on one branch; x / eps when stationary, the pole when one is met.
double zero_energy_endpoint(const Potential& P, double x, double t, double eps, Branch b, const QuadratureSpec& spec) {
  const double x0 = x / eps;
  if (P.U_along(x0) == 0.0) return x;
  try {
    return eps * characteristic_endpoint(Characteristic{P, 0.0, b, x0}, t / eps, spec);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::singular_interval) throw;
    return 0.0;
  }
}

}  // namespace

double action_value(const Potential& P, const InitialData& u0, double r, ActionBranch branch, double x, double t,
                    double eps, const QuadratureSpec& spec) {
  spec.validate();
  return evaluate_action(P, u0, r, branch, x, t, eps, spec).value;
}

HomogenizationResult u_eps(const Potential& P, const InitialData& u0, double x, double t, double eps,
                           const QuadratureSpec& spec, const UepsOptions& opt) {
  spec.validate();
  if (!(t > 0.0) || !(eps > 0.0 && eps <= 1.0)) fail(ErrorKind::config, "u_eps needs t > 0 and eps in (0, 1]");
  if (opt.r_grid_points < 2 || opt.polish_candidates < 0 || !(opt.r_grid_span > 0.0 && opt.r_grid_span < 1.0))
    fail(ErrorKind::config, "invalid energy search options");

  HomogenizationResult res;
  res.x = x;
  res.t = t;
  res.epsilon = eps;
  res.sandwich_hi = zero_energy_endpoint(P, x, t, eps, Branch::plus, spec);
  res.sandwich_lo = zero_energy_endpoint(P, x, t, eps, Branch::minus, spec);
  res.u_eps = u0.min_on(res.sandwich_lo, res.sandwich_hi);
  res.branch = ActionBranch::nonpositive;
  res.r_star = 0.0;
  res.endpoint = res.sandwich_lo;
  if (u0(res.sandwich_hi) == res.u_eps) res.endpoint = res.sandwich_hi;

  // A(r) >= r t + inf u0, so energies above (best - inf u0) / t cannot improve.
  const double floor_u0 = u0.inf();
  const double r0 = energy_cutoff(u0, P);
  auto bound = [&] { return std::isfinite(floor_u0) ? std::min(r0, (res.u_eps - floor_u0) / t) : r0; };
  const double r_hi = bound();
  if (!(r_hi > 0.0)) return res;

  const int n = opt.r_grid_points;
  std::vector<double> grid(n);
  for (int k = 0; k < n; ++k) grid[k] = r_hi * std::pow(opt.r_grid_span, double(n - 1 - k) / double(n - 1));

  auto consider = [&](double r, ActionBranch b) {
    const auto a = evaluate_action(P, u0, r, b, x, t, eps, spec);
    ++res.action_evaluations;
    if (a.value < res.u_eps) {
      res.u_eps = a.value;
      res.r_star = r;
      res.branch = b;
      res.endpoint = a.endpoint;
    }
    return a.value;
  };

  struct Candidate {
    double value;
    ActionBranch branch;
    int k;
  };
  std::vector<Candidate> seen;
  for (ActionBranch b : {ActionBranch::plus, ActionBranch::minus}) {
    for (int k = 0; k < n; ++k) {
      if (grid[k] >= bound()) break;
      seen.push_back({consider(grid[k], b), b, k});
    }
  }
  std::sort(seen.begin(), seen.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  const std::size_t polish = std::min<std::size_t>(seen.size(), std::size_t(opt.polish_candidates));
  for (std::size_t c = 0; c < polish; ++c) {
    const auto [value, b, k] = seen[c];
    double lo = k > 0 ? grid[k - 1] : 0.5 * grid[0];
    double hi = k + 1 < n ? grid[k + 1] : grid[k];
    (void)golden_section([&](double r) { return consider(r, b); }, lo, hi, opt.polish_rel_tol);
  }
  return res;
}

namespace {

// Kinks of u0 where minimizers often sit.
std::vector<double> kinks(const InitialData& u0) {
  const auto& p = u0.parameters();
  if (u0.kind() != InitialKind::cone) return {};
  std::vector<double> k{p[2]};
  if (std::isfinite(p[1])) {
    k.push_back(p[2] - p[1]);
    k.push_back(p[2] + p[1]);
  }
  return k;
}

}  // namespace

double u_hom(const EffectiveModel& M, const InitialData& u0, double x, double t) {
  if (!(t > 0.0)) fail(ErrorKind::config, "u_hom needs t > 0");
  const double ux = u0(x);
  const double osc = ux - u0.inf();
  const double lip = u0.lipschitz_constant();
  const double qmax = M.q_max() * (1.0 - 1e-9);

  // Beyond q_cut, t L(q) exceeds every possible gain of u0 and y cannot beat y = x.
  auto gain = [&](double q) { return std::min(osc, lip * t * q); };
  constexpr int kScan = 400;
  int last = -1;
  for (int i = 1; i <= kScan; ++i) {
    const double q = qmax * double(i) / kScan;
    if (t * M.L(q, false) <= gain(q)) last = i;
  }
  if (last == kScan) fail(ErrorKind::out_of_table, "u_hom needs slopes beyond the table; extend mu_max");
  const double q_cut = qmax * double(last + 1) / kScan;

  auto coarse = [&](double y) { return t * M.L((x - y) / t, false) + u0(y); };
  auto exact = [&](double y) { return t * M.L((x - y) / t, true) + u0(y); };

  constexpr int kGrid = 801;
  const double lo_y = x - t * q_cut, hi_y = x + t * q_cut;
  std::vector<double> ys(kGrid), fs(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    ys[i] = lo_y + (hi_y - lo_y) * double(i) / double(kGrid - 1);
    fs[i] = coarse(ys[i]);
  }
  std::vector<int> order(kGrid);
  for (int i = 0; i < kGrid; ++i) order[i] = i;
  std::partial_sort(order.begin(), order.begin() + 3, order.end(), [&](int a, int b) { return fs[a] < fs[b]; });

  struct Candidate {
    double y;
    bool smooth;  // interior minimum of the coarse objective, polished with exact Lbar
  };
  std::vector<Candidate> finals{{x, false}};
  for (double k : kinks(u0))
    if (k >= lo_y && k <= hi_y) finals.push_back({k, false});
  for (int c = 0; c < 3; ++c) {
    const int i = order[c];
    const double y = golden_section(coarse, ys[std::max(i - 1, 0)], ys[std::min(i + 1, kGrid - 1)], 1e-12);
    auto same = [&](const Candidate& f) { return std::abs(f.y - y) < 1e-9 * (1.0 + std::abs(y)); };
    if (std::none_of(finals.begin(), finals.end(), same)) finals.push_back({y, true});
  }
  std::sort(finals.begin(), finals.end(), [&](const Candidate& a, const Candidate& b) { return coarse(a.y) < coarse(b.y); });
  // The coarse ranking picks three candidates; exact Lbar decides among them.
  const double spacing = (hi_y - lo_y) / double(kGrid - 1);
  double best = ux;
  const std::size_t keep = std::min<std::size_t>(finals.size(), 3);
  for (std::size_t i = 0; i < keep; ++i) {
    double y = finals[i].y;
    if (finals[i].smooth) y = minimize(exact, std::max(lo_y, y - spacing), std::min(hi_y, y + spacing));
    best = std::min({best, exact(y), exact(finals[i].y)});
  }
  return best;
}

double FdSolution::at(double xq) const {
  if (x.size() < 2 || xq < x.front() || xq > x.back()) fail(ErrorKind::config, "point lies outside the FD grid");
  const double dx = x[1] - x[0];
  const std::size_t i = std::min(std::size_t((xq - x.front()) / dx), x.size() - 2);
  const double w = (xq - x[i]) / dx;
  return (1.0 - w) * u[i] + w * u[i + 1];
}

double fd_default_half_width(const Potential& P, const InitialData& u0, double t,
                             const std::vector<double>& report_points) {
  double m = 0.0;
  for (double x : report_points) m = std::max(m, std::abs(x));
  // Moving a distance D costs at least D^2 / (2t) while u0 gains at most its oscillation.
  const double osc = u0.sup() - u0.inf();
  const double speed = t * std::sqrt(2.0 * (energy_cutoff(u0, P) + P.sup_U()));
  const double action = std::isfinite(osc) ? std::sqrt(2.0 * t * osc) : kInf;
  return m + std::min(speed, action) + 0.5;
}

FdSolution fd_viscosity_solve(const Potential& P, const InitialData& u0, double eps, double t_final,
                              const FdOptions& opt, const std::vector<double>& report_points) {
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) fail(ErrorKind::cfl_violation, "CFL factor must lie in (0, 1]");
  if (!(opt.dx > 0.0) || !(eps > 0.0) || !(t_final >= 0.0)) fail(ErrorKind::config, "invalid FD configuration");
  double X = opt.half_width > 0.0 ? opt.half_width : fd_default_half_width(P, u0, t_final, report_points) + 2.0 * eps;
  for (double x : report_points)
    if (!(std::abs(x) < X)) fail(ErrorKind::config, "report point outside the FD domain");
  const long half = long(std::ceil(X / opt.dx));
  const std::size_t N = std::size_t(2 * half + 1);

  FdSolution sol;
  sol.x.resize(N);
  sol.u.resize(N);
  std::vector<double> V(N), D(N + 1, 0.0), next(N);
  double vmin = kInf, vmax = -kInf;
  for (std::size_t i = 0; i < N; ++i) {
    sol.x[i] = double(long(i) - half) * opt.dx;
    sol.u[i] = u0(sol.x[i]);
    V[i] = -P.U_along(sol.x[i] / eps);
    vmin = std::min(vmin, V[i]);
    vmax = std::max(vmax, V[i]);
  }
  // Gradients created by the potential within one step stay below this speed.
  const double s_pot = std::sqrt(2.0 * (vmax - vmin));
  double time = 0.0;
  while (time < t_final) {
    double speed = s_pot;
    for (std::size_t i = 1; i < N; ++i) {
      D[i] = (sol.u[i] - sol.u[i - 1]) / opt.dx;
      speed = std::max(speed, std::abs(D[i]));
    }
    D[0] = 0.0;
    D[N] = 0.0;
    double dt = speed > 0.0 ? opt.cfl * opt.dx / speed : t_final - time;
    if (time + dt >= t_final) dt = t_final - time;
    for (std::size_t i = 0; i < N; ++i) {
      const double pm = std::max(D[i], 0.0), pp = std::min(D[i + 1], 0.0);
      next[i] = sol.u[i] - dt * (0.5 * std::max(pm * pm, pp * pp) + V[i]);
    }
    sol.u.swap(next);
    time = (dt == t_final - time) ? t_final : time + dt;
    ++sol.steps;
    if (sol.steps > 100000000L) fail(ErrorKind::numerical, "FD solve exceeded its step budget");
  }
  sol.t = t_final;
  for (double v : sol.u)
    if (!std::isfinite(v)) fail(ErrorKind::numerical, "FD solution is not finite");
  return sol;
}

double predicted_upper_exponent(double gamma) {
  return gamma > 2.0 ? (gamma - 2.0) / (3.0 * gamma - 2.0) : std::numeric_limits<double>::quiet_NaN();
}

double predicted_lower_exponent(double gamma) {
  if (gamma >= 2.0) return 1.0;
  if (gamma >= 1.0) return 0.5;
  return gamma / (gamma + 1.0);
}

SweepResult rate_sweep(const SweepConfig& config) {
  return rate_sweep(config, EffectiveModel::build(config.potential, config.quad, config.effective));
}

SweepResult rate_sweep(const SweepConfig& c, const EffectiveModel& M) {
  if (c.epsilons.size() < 6) fail(ErrorKind::config, "the eps grid needs at least six points");
  for (std::size_t i = 1; i < c.epsilons.size(); ++i)
    if (!(c.epsilons[i] < c.epsilons[i - 1])) fail(ErrorKind::config, "the eps grid must be decreasing");
  if (c.points.empty()) fail(ErrorKind::config, "the sweep needs evaluation points");

  SweepResult out;
  const auto& U = c.potential.suspension();
  const bool prototype = U.kind() != SuspensionKind::trig_polynomial;
  const double gamma = prototype ? U.gamma() : std::numeric_limits<double>::quiet_NaN();
  if (prototype) {
    out.predicted_upper = predicted_upper_exponent(gamma);
    out.predicted_lower = predicted_lower_exponent(gamma);
    out.regime = gamma > 2.0 ? "power" : gamma == 2.0 ? "reciprocal-log" : "lower-bound-only";
  } else {
    out.regime = "descriptive";
  }

  std::map<double, double> hom;
  for (double x : c.points) hom[x] = u_hom(M, c.u0, x, c.t);
  for (double eps : c.epsilons) {
    double e = 0.0;
    for (double x : c.points) {
      const auto r = u_eps(c.potential, c.u0, x, c.t, eps, c.quad, c.search);
      SweepRow row{eps, x, r.u_eps, hom[x], std::abs(r.u_eps - hom[x]), r.r_star, r.branch};
      e = std::max(e, row.error);
      out.rows.push_back(row);
    }
    out.epsilons.push_back(eps);
    out.errors.push_back(e);
  }
  out.nonincreasing = true;
  for (std::size_t i = 1; i < out.errors.size(); ++i)
    if (out.errors[i] > 1.1 * out.errors[i - 1]) out.nonincreasing = false;
  const bool any = std::any_of(out.errors.begin(), out.errors.end(), [](double e) { return e > 0.0; });
  if (any) {
    if (prototype && gamma == 2.0)
      out.fit = fit_reciprocal_log_law(out.epsilons, out.errors);
    else if (std::all_of(out.errors.begin(), out.errors.end(), [](double e) { return e > 0.0; }))
      out.fit = fit_power_law(out.epsilons, out.errors);
  }
  return out;
}

}  // namespace hjqp
