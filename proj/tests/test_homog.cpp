#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "hjqp/dynamics.hpp"
#include "hjqp/homog.hpp"
#include "support.hpp"

using namespace hjqp;
using namespace hjqp::test;

namespace {

const Frequency kXi({1.0, sqrt2});
const QuadratureSpec kSpec{};
constexpr double kInf = std::numeric_limits<double>::infinity();

Potential a1(double g) { return Potential(Suspension::prototype_a1(g), kXi); }
Potential constant_u(double c) { return Potential(Suspension::constant(c), kXi); }

const EffectiveModel& free_model() {
  static const EffectiveModel m = EffectiveModel::build(constant_u(0.0), kSpec);
  return m;
}

const EffectiveModel& model(double g) {
  static const EffectiveModel m1 = EffectiveModel::build(a1(1.0), kSpec);
  static const EffectiveModel m6 = EffectiveModel::build(a1(6.0), kSpec);
  return g == 1.0 ? m1 : m6;
}

}  // namespace

TEST_SUITE("homog") {
  TEST_CASE("initial data") {
    const auto cone = InitialData::cone();
    CHECK(cone(0.0) == 0.0);
    CHECK(cone(0.4) == doctest::Approx(-0.4));
    CHECK(cone(-3.0) == -1.0);
    CHECK(cone.lipschitz_constant() == 1.0);
    CHECK(cone.inf() == -1.0);
    CHECK(cone.sup() == 0.0);
    CHECK(cone.min_on(-0.2, 0.5) == doctest::Approx(-0.5));
    CHECK(cone.min_on(0.5, -0.2) == doctest::Approx(-0.5));
    const auto v = InitialData::cone(-1.0, kInf);
    CHECK(v(-2.5) == 2.5);
    CHECK(v.min_on(0.5, 2.0) == 0.5);
    CHECK(v.inf() == 0.0);
    const auto b = InitialData::smooth_bump(2.0, 0.5, 1.0);
    CHECK(b(1.0) == 2.0);
    CHECK(b.sup() == 2.0);
    // Maximal slope of h exp(-(y/w)^2) is h sqrt(2)/w e^{-1/2}.
    double slope = 0.0;
    for (int i = -4000; i < 4000; ++i) slope = std::max(slope, std::abs(b(1e-3 * (i + 1)) - b(1e-3 * i)) / 1e-3);
    CHECK(slope <= b.lipschitz_constant());
    CHECK(slope == doctest::Approx(b.lipschitz_constant()).epsilon(1e-3));
    CHECK_THROWS_AS((void)InitialData::cone(1.0, 0.0), Error);
  }

  TEST_CASE("energy cutoff") {
    CHECK(energy_cutoff(InitialData::affine(0.0, 1.0), constant_u(0.0)) == 0.0);
    const auto P = constant_u(4.0);
    const double r0 = energy_cutoff(InitialData::cone(), P);
    CHECK(std::isfinite(r0));
    CHECK(r0 == doctest::Approx(1.0 * std::sqrt(2 * (r0 + 4.0)) + 4.0).epsilon(1e-12));
    double last = 0.0;
    for (double C : {0.5, 1.0, 2.0, 4.0}) {
      const double r = energy_cutoff(InitialData::cone(C), a1(6.0));
      CHECK(r >= last);
      last = r;
    }
  }

  TEST_CASE("action values with closed forms") {
    const InitialData zero = InitialData::affine(0.0);
    for (double eps : {1.0, 0.1, 0.01})
      CHECK(action_value(constant_u(2.0), zero, 0.0, ActionBranch::plus, 0.0, 1.0, eps, kSpec) ==
            doctest::Approx(4.0).epsilon(1e-12));
    // Free motion at speed sqrt(2 r): -r t + sqrt(2r) * sqrt(2r) t + u0(x + sqrt(2r) t).
    const auto cone = InitialData::cone();
    const double r = 0.18;
    CHECK(action_value(constant_u(0.0), cone, r, ActionBranch::minus, 0.3, 1.0, 0.1, kSpec) ==
          doctest::Approx(r + cone(0.3 - 0.6)).epsilon(1e-12));
  }

  TEST_CASE("action value against a direct Lagrangian quadrature") {
    const auto P = a1(6.0);
    const auto cone = InitialData::cone();
    const double r = 0.5, eps = 0.1, t = 1.0;
    const double S = t / eps;
    const Characteristic c{P, r, Branch::plus, 0.0};
    const int n = 200000;
    std::vector<double> s;
    for (int i = 1; i <= n; ++i) s.push_back(S * i / n);
    const auto path = characteristic_path(c, s, kSpec);
    // L(x, v) = v^2 / 2 - V(x) with |v|^2 = 2 (r - V) along the trajectory.
    auto lag = [&](int i) {
      const double y = i == 0 ? 0.0 : path[i - 1];
      return (r - P.V(y)) - P.V(y);
    };
    double sum = lag(0) + lag(n);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * lag(i);
    const double direct = eps * sum * (S / n) / 3.0 + cone(eps * path.back());
    CHECK(action_value(P, cone, r, ActionBranch::plus, 0.0, t, eps, kSpec) == doctest::Approx(direct).epsilon(1e-4));
  }

  TEST_CASE("free case: u_eps matches exact Hopf-Lax") {
    const auto Z = constant_u(0.0);
    const auto absy = InitialData::cone(-1.0, kInf);
    CHECK(std::abs(u_eps(Z, absy, 0.0, 1.0, 0.5, kSpec).u_eps) <= 1e-10);
    for (double a : {-0.8, 0.3, 1.5}) {
      const auto aff = InitialData::affine(a);
      for (double x : {-0.7, 0.0, 0.4}) {
        for (double eps : {1.0, 0.1}) {
          CHECK(u_eps(Z, aff, x, 1.0, eps, kSpec).u_eps == doctest::Approx(a * x - 0.5 * a * a).scale(1.0).epsilon(1e-6));
        }
        CHECK(u_hom(free_model(), aff, x, 1.0) == doctest::Approx(a * x - 0.5 * a * a).scale(1.0).epsilon(1e-8));
      }
    }
    const auto cone = InitialData::cone();
    for (double eps : {1.0, 0.25, 1.0 / 64}) {
      for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        CHECK(std::abs(u_eps(Z, cone, x, 1.0, eps, kSpec).u_eps - u_hom(free_model(), cone, x, 1.0)) <= 1e-8);
      }
    }
  }

  TEST_CASE("u_hom of constant data") {
    CHECK(u_hom(model(6.0), InitialData::affine(0.0), 0.3, 1.0) == 0.0);
    CHECK(u_hom(model(6.0), InitialData::affine(0.0, 2.0), -1.0, 0.5) == 2.0);
  }

  TEST_CASE("u_hom of affine data is a x - t H(a)") {
    EffectiveOptions wide;
    wide.cover_p = model(1.0).p0() + 6.0;
    const auto M = EffectiveModel::build(a1(1.0), kSpec, wide);
    for (double a : {0.5 * M.p0(), M.p0() + 0.5, -(M.p0() + 1.0)}) {
      const double H = std::abs(a) <= M.p0() ? 0.0 : effective_H(M, a);
      for (double x : {-0.5, 0.25}) {
        CHECK(u_hom(M, InitialData::affine(a), x, 1.0) == doctest::Approx(a * x - H).scale(1.0).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("u_hom with the flat-gradient gap") {
    // L(q) = p0 |q| near 0 with p0 > 1, so |y| is optimal at y = x.
    const auto& M = model(1.0);
    REQUIRE(M.p0() > 1.0);
    const auto absy = InitialData::cone(-1.0, kInf);
    for (double x : {-0.5, 0.0, 0.3}) CHECK(u_hom(M, absy, x, 1.0) == doctest::Approx(std::abs(x)).scale(1.0).epsilon(1e-8));
  }

  TEST_CASE("u_hom is nonincreasing in t") {
    const auto& M = model(6.0);
    const auto cone = InitialData::cone();
    for (double x : {-0.5, 0.0, 0.8}) {
      double last = cone(x);
      for (double t : {0.25, 0.5, 1.0, 2.0}) {
        const double u = u_hom(M, cone, x, t);
        CHECK(u <= last + 1e-10);
        last = u;
      }
    }
  }

  TEST_CASE("energy cutoff never binds") {
    const auto P = a1(6.0);
    const auto cone = InitialData::cone();
    const double r0 = energy_cutoff(cone, P);
    for (double x : {-1.0, 0.0, 0.5}) {
      const auto res = u_eps(P, cone, x, 1.0, 1.0 / 16, kSpec);
      CHECK(res.r_star < r0);
      CHECK(res.sandwich_lo <= res.sandwich_hi);
    }
  }

  TEST_CASE("finite differences: exact cases") {
    const auto Z = constant_u(0.0);
    const std::vector<double> pts{-0.5, 0.0, 0.5};
    FdOptions o;
    o.dx = 1e-2;
    o.half_width = 3.0;
    const auto aff = InitialData::affine(0.7, 0.1);
    const auto s = fd_viscosity_solve(Z, aff, 0.5, 1.0, o, pts);
    for (double x : pts) CHECK(std::abs(s.at(x) - (0.7 * x + 0.1 - 0.5 * 0.49)) <= 1e-8);
    const auto w = fd_viscosity_solve(constant_u(2.0), InitialData::affine(0.0), 0.5, 1.3, o, pts);
    for (double x : pts) CHECK(std::abs(w.at(x) - 2.6) <= 1e-6);
    CHECK(w.t == doctest::Approx(1.3));
  }

  TEST_CASE("finite differences reject CFL factors above one") {
    FdOptions o;
    o.cfl = 1.5;
    try {
      (void)fd_viscosity_solve(a1(6.0), InitialData::cone(), 0.25, 1.0, o, {0.0});
      FAIL("no cfl_violation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::cfl_violation);
    }
  }

  TEST_CASE("sandwich value stays below the viscosity solution") {
    // The r <= 0 branch takes min u0 over the reachable interval and drops the running
    // cost, so it can only underestimate.
    const auto P = a1(6.0);
    const auto cone = InitialData::cone();
    const std::vector<double> pts{-1.0, -0.5, 0.0, 0.5, 1.0};
    FdOptions o;
    o.dx = 2e-3;
    const auto fd = fd_viscosity_solve(P, cone, 0.25, 1.0, o, pts);
    for (double x : pts) CHECK(u_eps(P, cone, x, 1.0, 0.25, kSpec).u_eps <= fd.at(x) + 1e-2);
  }

  TEST_CASE("predicted exponents") {
    CHECK(predicted_upper_exponent(6.0) == doctest::Approx(0.25));
    CHECK(std::isnan(predicted_upper_exponent(2.0)));
    CHECK(predicted_lower_exponent(6.0) == 1.0);
    CHECK(predicted_lower_exponent(1.0) == 0.5);
    CHECK(predicted_lower_exponent(0.5) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("sweep structure and regimes") {
    SweepConfig free(constant_u(0.0));
    for (int k = 3; k <= 8; ++k) free.epsilons.push_back(std::ldexp(1.0, -k));
    const auto f = rate_sweep(free);
    CHECK(f.rows.size() == 6 * free.points.size());
    for (double e : f.errors) CHECK(e <= 1e-8);

    SweepConfig g2(a1(2.0));
    g2.epsilons = free.epsilons;
    g2.points = {0.0};
    const auto r2 = rate_sweep(g2);
    CHECK(r2.regime == "reciprocal-log");
    CHECK(r2.fit.model == FitModel::reciprocal_log_law);

    SweepConfig g05(a1(0.5));
    g05.epsilons = free.epsilons;
    g05.points = {0.0};
    const auto r05 = rate_sweep(g05);
    CHECK(r05.regime == "lower-bound-only");
    CHECK(r05.predicted_lower == doctest::Approx(1.0 / 3.0));
    CHECK(std::isnan(r05.predicted_upper));

    SweepConfig short_grid(constant_u(0.0));
    short_grid.epsilons = {0.5, 0.25, 0.125};
    CHECK_THROWS_AS((void)rate_sweep(short_grid), Error);
  }
}
