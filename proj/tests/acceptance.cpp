// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 unless a criterion
// throws; with --strict any FAIL is nonzero as well.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "hjqp/dynamics.hpp"
#include "hjqp/effective.hpp"
#include "hjqp/ergodic.hpp"
#include "hjqp/homog.hpp"
#include "support.hpp"

using namespace hjqp;
using hjqp::test::Stopwatch;

namespace {

const Frequency kXi({1.0, std::sqrt(2.0)});
const QuadratureSpec kSpec{};

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Potential a1(double gamma) { return Potential(Suspension::prototype_a1(gamma), kXi); }

EffectiveModel model_covering(const Potential& P, double extra) {
  EffectiveOptions o;
  o.cover_p = compute_p0(P, kSpec) + extra;
  return EffectiveModel::build(P, kSpec, o);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

std::vector<double> dyadic_eps(int from, int to) {
  std::vector<double> e;
  for (int k = from; k <= to; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

const std::vector<double> kPoints{-1.0, -0.5, 0.0, 0.5, 1.0};

Outcome c1_free_identity() {
  Outcome o;
  Potential Z(Suspension::constant(0.0), kXi);
  const auto M = EffectiveModel::build(Z, kSpec);
  const auto cone = InitialData::cone();
  double worst = 0.0;
  for (double eps : {1.0, 0.5, 0.25, 0.125, 0.0625, 0.015625}) {
    for (double x : kPoints) {
      const double ue = u_eps(Z, cone, x, 1.0, eps, kSpec).u_eps;
      worst = std::max(worst, std::abs(ue - u_hom(M, cone, x, 1.0)));
    }
  }
  o.check(worst <= 1e-8, fmt("max |u_eps - u_hom| = %.2e", worst));
  return o;
}

Outcome c2_inversion() {
  Outcome o;
  for (double g : {1.0, 2.0, 6.0}) {
    const auto M = model_covering(a1(g), 5.0);
    const double p0 = M.p0();
    const auto ps = linspace(p0 + 1e-3, p0 + 5.0, 50);
    double worst = 0.0, even = 0.0;
    bool convex = true;
    std::vector<double> Hs;
    for (double p : ps) {
      const double h = M.H(p);
      Hs.push_back(h);
      worst = std::max(worst, std::abs(M.phi_exact(h) - p) / p);
      even = std::max(even, std::abs(M.H(-p) - h));
    }
    for (std::size_t i = 1; i + 1 < ps.size(); ++i) convex = convex && Hs[i - 1] - 2 * Hs[i] + Hs[i + 1] >= -1e-12;
    // Convexity across the flat part and the edge: H(0) = 0 and slopes nondecreasing.
    convex = convex && M.H(0.0) == 0.0 && M.H(0.5 * p0) == 0.0 && Hs.front() >= 0.0;
    o.check(worst <= 1e-6 && even == 0.0 && convex,
            "gamma " + fmt("%g", g) + fmt(": rel %.1e, even gap %.1e", worst, even) + (convex ? ", convex" : ", not convex"));
  }
  return o;
}

Outcome c3_derivative() {
  Outcome o;
  for (double g : {1.0, 6.0}) {
    const auto M = model_covering(a1(g), 5.0);
    double worst = 0.0;
    for (double p : linspace(M.p0() + 0.1, M.p0() + 4.0, 20)) {
      const double h = 1e-4 * p;
      const double fd = (M.H(p + h) - M.H(p - h)) / (2 * h);
      worst = std::max(worst, std::abs(M.H_prime(p) - fd) / std::abs(fd));
    }
    o.check(worst <= 1e-3, "gamma " + fmt("%g", g) + fmt(": rel %.1e", worst));
  }
  return o;
}

Outcome c4_corrector_exactness() {
  Outcome o;
  const auto P = a1(1.0);
  const auto M = EffectiveModel::build(P, kSpec);
  for (double off : {0.0, 1.0}) {
    const double p = M.p0() + off;
    const double H = M.H(p);
    const double d = 1e-3;
    double worst = 0.0;
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) {
      const double x = 0.01 * (i + 0.5);
      for (int k : {-2, -1, 1, 2}) xs.push_back(x + k * d);
    }
    const auto v = corrector_values(M, p, xs);
    for (int i = 0; i < 1000; ++i) {
      const double x = 0.01 * (i + 0.5);
      const double* w = &v[4 * i];
      const double dv = (w[0] - 8 * w[1] + 8 * w[2] - w[3]) / (12 * d);
      const double res = 0.5 * (p + dv) * (p + dv) + P.V(x) - H;
      worst = std::max(worst, std::abs(res));
    }
    o.check(worst <= 1e-5, fmt("p0+%g: residual %.1e", off, worst));
  }
  return o;
}

Outcome c5_corrector_growth() {
  Outcome o;
  const auto grid = default_t_grid();
  {
    const auto M = EffectiveModel::build(a1(6.0), kSpec);
    const auto g = corrector_growth(M, M.p0(), grid);
    const auto env = fit_power_law(g.t, g.envelope);
    o.check(env.exponent <= 0.1, fmt("gamma 6: sup|v| %.3g, growth exponent %.3f", g.envelope.back(), env.exponent));
  }
  {
    const auto M = EffectiveModel::build(a1(1.0), kSpec);
    const auto g = corrector_growth(M, M.p0(), grid);
    o.check(g.fit.decay_rate() >= 0.30, fmt("gamma 1: decay exponent %.3f", g.fit.decay_rate()));
  }
  return o;
}

Outcome c6_birkhoff() {
  Outcome o;
  const auto T = default_T_grid();
  const auto mode = birkhoff_rate_experiment(single_mode_observable({0, 1}), kXi, T, kSpec, 0.0);
  o.check(std::abs(mode.fit.decay_rate() - 1.0) <= 0.05, fmt("single mode %.3f", mode.fit.decay_rate()));
  const auto s6 = birkhoff_rate_experiment(sqrt_u_observable(Suspension::prototype_a1(6.0)), kXi, T, kSpec);
  o.check(s6.fit.decay_rate() >= 0.8, fmt("sqrt U gamma 6: %.3f", s6.fit.decay_rate()));
  const auto s05 = birkhoff_rate_experiment(sqrt_u_observable(Suspension::prototype_a1(0.5)), kXi, T, kSpec);
  o.check(s05.fit.decay_rate() >= 0.25, fmt("sqrt U gamma 0.5: %.3f", s05.fit.decay_rate()));
  return o;
}

Outcome c7_unbounded() {
  Outcome o;
  const auto T = default_T_grid();
  const auto r2 = unbounded_mean_experiment(a1(2.0), T, kSpec);
  o.check(r2.fit.model == FitModel::log_law && r2.fit.r_squared >= 0.9, fmt("gamma 2: log-law r2 %.3f", r2.fit.r_squared));
  const auto r1 = unbounded_mean_experiment(a1(1.0), T, kSpec);
  o.check(r1.fit.decay_rate() >= 0.10, fmt("gamma 1: decay %.3f", r1.fit.decay_rate()));
  const auto r6 = unbounded_mean_experiment(a1(6.0), T, kSpec);
  o.check(r6.fit.exponent >= 0.15 && r6.fit.exponent <= 0.45, fmt("gamma 6: growth %.3f", r6.fit.exponent));
  return o;
}

Outcome c8_characteristics() {
  Outcome o;
  const auto grid = default_t_grid();
  {
    const auto M = EffectiveModel::build(a1(6.0), kSpec);
    const auto v = velocity_average(M, M.p0(), grid);
    const double e = v.fit.decay_rate();
    o.check(e >= 0.18 && e <= 0.45, fmt("gamma 6: exponent %.3f", e));
  }
  {
    const auto M = EffectiveModel::build(a1(2.0), kSpec);
    const auto v = velocity_average(M, M.p0(), grid);
    o.check(v.fit.model == FitModel::reciprocal_log_law && v.fit.r_squared >= 0.85,
            fmt("gamma 2: reciprocal-log r2 %.3f", v.fit.r_squared));
  }
  return o;
}

Outcome c9_sweep() {
  Outcome o;
  {
    SweepConfig c(a1(6.0));
    c.epsilons = dyadic_eps(3, 10);
    const auto r = rate_sweep(c);
    o.check(r.nonincreasing, std::string("gamma 6: e(eps) ") + (r.nonincreasing ? "nonincreasing" : "not monotone"));
    o.check(r.fit.model == FitModel::power_law && r.fit.exponent >= 0.20, fmt("exponent %.3f", r.fit.exponent));
  }
  {
    SweepConfig c(a1(2.0));
    c.epsilons = dyadic_eps(3, 10);
    const auto r = rate_sweep(c);
    o.check(r.fit.model == FitModel::reciprocal_log_law && r.fit.r_squared >= 0.8,
            fmt("gamma 2: reciprocal-log r2 %.3f", r.fit.r_squared));
  }
  return o;
}

Outcome c10_fd_oracle() {
  Outcome o;
  const auto P = a1(6.0);
  const auto cone = InitialData::cone();
  const double eps = 0.25;
  std::vector<double> ue;
  for (double x : kPoints) ue.push_back(u_eps(P, cone, x, 1.0, eps, kSpec).u_eps);
  auto gap = [&](double dx) {
    FdOptions f;
    f.dx = dx;
    const auto sol = fd_viscosity_solve(P, cone, eps, 1.0, f, kPoints);
    double g = 0.0;
    for (std::size_t i = 0; i < kPoints.size(); ++i) g = std::max(g, std::abs(ue[i] - sol.at(kPoints[i])));
    return g;
  };
  const double g1 = gap(1e-3);
  const double g2 = gap(5e-4);
  o.check(g1 <= 2e-2, fmt("gap at dx=1e-3 %.3g", g1));
  o.check(g2 <= 0.6 * g1, fmt("gap ratio %.3f", g2 / g1));
  return o;
}

Outcome c11_inclusion() {
  Outcome o;
  const auto est = inclusion_length_estimate(sum_of_sines_observable(), kXi, {0.2, 0.1, 0.05, 0.025, 0.0125});
  o.check(est.fit.exponent >= 0.8 && est.fit.exponent <= 1.3, fmt("slope %.3f", est.fit.exponent));
  return o;
}

Outcome c12_divergence() {
  Outcome o;
  for (double g : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    bool divergent = false;
    double v = 0.0;
    try {
      v = torus_inv_sqrt_integral(Suspension::prototype_a1(g), kSpec);
    } catch (const DivergenceSuspected&) {
      divergent = true;
    }
    const bool expect = g >= 2.0;
    o.check(divergent == expect && (divergent || std::isfinite(v)),
            "gamma " + fmt("%g", g) + (divergent ? " divergent" : fmt(" %.6g", v)));
  }
  return o;
}

struct Criterion {
  int id;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  bool strict = false;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0)
      strict = true;
    else
      only.push_back(std::atoi(argv[i]));
  }
  const std::vector<Criterion> all{
      {1, 5, c1_free_identity},    {2, 120, c2_inversion},  {3, 60, c3_derivative},
      {4, 30, c4_corrector_exactness}, {5, 180, c5_corrector_growth}, {6, 180, c6_birkhoff},
      {7, 300, c7_unbounded},      {8, 180, c8_characteristics}, {9, 600, c9_sweep},
      {10, 600, c10_fd_oracle},    {11, 120, c11_inclusion}, {12, 60, c12_divergence}};

  int failed = 0, errored = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Stopwatch sw;
    Outcome out;
    bool error = false;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      error = true;
      out.pass = false;
      out.detail = std::string("error: ") + e.what();
    }
    const double secs = sw.seconds();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = out.pass && in_time;
    std::printf("criterion %2d: %s  %s; %.1fs (limit %gs)%s\n", c.id, pass ? "PASS" : "FAIL", out.detail.c_str(), secs,
                c.limit_seconds, in_time ? "" : " [over time]");
    failed += !pass;
    errored += error;
  }
  if (errored) return 2;
  return strict && failed ? 1 : 0;
}
