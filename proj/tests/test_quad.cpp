#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "hjqp/quad.hpp"
#include "support.hpp"

using namespace hjqp;
using namespace hjqp::test;

namespace {

const Frequency kXi({1.0, sqrt2});
const QuadratureSpec kSpec{};

TorusFunction prototype_power(double gamma, double power) {
  return [gamma, power](double x1, double x2) { return std::pow(a1_reference(gamma, x1, x2), power); };
}

// Same in offset form around the minimizer, accurate for tiny offsets.
TorusFunction prototype_power_offset(double gamma, double power) {
  return [gamma, power](double h1, double h2) {
    const double s1 = std::sin(pi * h1), s2 = std::sin(pi * h2);
    return std::pow(std::pow(2 * s1 * s1 + 2 * s2 * s2, gamma), power);
  };
}

}  // namespace

TEST_SUITE("quad") {
  TEST_CASE("torus integrals with closed forms") {
    CHECK(torus_integral([](double, double) { return 1.0; }, kSpec) == doctest::Approx(1.0).epsilon(1e-12));
    auto f = [](double x1, double x2) { return 2.0 - std::sin(2 * pi * x1) - std::sin(2 * pi * x2); };
    CHECK(torus_integral(f, kSpec) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(torus_integral(prototype_power(1.0, 1.0), kSpec, {0.25, 0.25}) == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(torus_integral(prototype_power(2.0, 1.0), kSpec, {0.25, 0.25}) == doctest::Approx(5.0).epsilon(1e-11));
  }

  TEST_CASE("integrable singularity against a tensor Gauss-Legendre oracle") {
    // U^{-1/2} for gamma = 1/2 behaves like |h|^{-1/2} at the minimizer.
    auto f = prototype_power(0.5, -0.5);
    const double lib = torus_integral(f, kSpec, {0.25, 0.25});
    const double ref = composite_gl_2d(f, 512, 8);
    CHECK(lib == doctest::Approx(ref).epsilon(1e-3));
  }

  TEST_CASE("divergence dichotomy for U^{-1/2}") {
    for (double g : {0.5, 1.0, 1.5}) {
      const auto e = torus_integral_offset(prototype_power_offset(g, -0.5), kSpec);
      CHECK(std::isfinite(e.value));
      CHECK(e.value > 0.0);
    }
    for (double g : {2.0, 3.0}) {
      bool divergent = false;
      try {
        (void)torus_integral_offset(prototype_power_offset(g, -0.5), kSpec);
      } catch (const DivergenceSuspected& e) {
        divergent = true;
        CHECK(e.partial_sums().size() >= 6);
      }
      CHECK(divergent);
    }
  }

  TEST_CASE("torus integral is linear") {
    auto F = prototype_power(1.0, 0.5);
    auto G = [](double x1, double x2) { return std::cos(2 * pi * (x1 + 2 * x2)) + 1.5; };
    const double a = 0.7, b = -1.3;
    const double lhs = torus_integral([&](double x1, double x2) { return a * F(x1, x2) + b * G(x1, x2); }, kSpec,
                                      {0.25, 0.25});
    const double rhs = a * torus_integral(F, kSpec, {0.25, 0.25}) + b * torus_integral(G, kSpec, {0.25, 0.25});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }

  TEST_CASE("line integrals with closed forms") {
    const Potential zero(Suspension::constant(0.0), kXi);
    CHECK(line_integral_sqrt(zero, 2.0, 0.0, 3.0, kSpec) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(line_integral_sqrt(zero, 2.0, 1.0, 1.0, kSpec) == 0.0);
    const Potential two(Suspension::constant(2.0), kXi);
    CHECK(line_integral_inv_sqrt(two, 0.0, 0.0, 2.0, kSpec) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("inverse square root integral is singular at a zero of r - V") {
    const Potential a2(Suspension::prototype_a2(1.0), kXi);
    try {
      (void)line_integral_inv_sqrt(a2, 0.0, -1.0, 1.0, kSpec);
      FAIL("no singular_interval");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::singular_interval);
    }
    CHECK(a2.has_pole(0.0, -1.0, 1.0));
    CHECK_FALSE(a2.has_pole(0.1, -1.0, 1.0));
  }

  TEST_CASE("line integrals against composite Simpson with 10^6 intervals") {
    const Potential P(Suspension::prototype_a1(1.0), kXi);
    const double a = 0.3, b = 5.3;
    const double ref_sqrt = simpson([&](double x) { return std::sqrt(2 * (0.5 + P.U_along(x))); }, a, b, 1000000);
    CHECK(line_integral_sqrt(P, 0.5, a, b, kSpec) == doctest::Approx(ref_sqrt).epsilon(1e-6));
    const double ref_inv = simpson([&](double x) { return 1.0 / std::sqrt(2 * (1.0 - P.V(x))); }, a, b, 1000000);
    CHECK(line_integral_inv_sqrt(P, 1.0, a, b, kSpec) == doctest::Approx(ref_inv).epsilon(1e-6));
  }

  TEST_CASE("line integrals are additive over adjacent intervals") {
    const Potential P(Suspension::prototype_a1(6.0), kXi);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 20; ++i) {
      double x[3] = {u(rng), u(rng), u(rng)};
      std::sort(x, x + 3);
      const double whole = line_integral_sqrt(P, 0.2, x[0], x[2], kSpec);
      const double parts = line_integral_sqrt(P, 0.2, x[0], x[1], kSpec) + line_integral_sqrt(P, 0.2, x[1], x[2], kSpec);
      CHECK(whole == doctest::Approx(parts).epsilon(1e-11));
      CHECK_THROWS_AS((void)line_integral_sqrt(P, 0.2, x[2], x[0], kSpec), Error);
    }
  }

  TEST_CASE("orbit integral of a single mode") {
    TorusObservable F = [](const double* x) { return std::sin(2 * pi * x[0]); };
    const double T = 7.3;
    const auto e = line_integral_orbit(kXi, F, 0.0, T, kSpec);
    CHECK(e.converged);
    CHECK(e.value == doctest::Approx((1 - std::cos(2 * pi * T)) / (2 * pi)).epsilon(1e-11));
  }

  TEST_CASE("Sobolev norms") {
    CHECK(sobolev_norm(Suspension::constant(3.0), 2.0, 64) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    auto c = [](double x1, double) { return sqrt2 * std::cos(2 * pi * x1); };
    for (double s : {0.0, 1.0, 2.5}) CHECK(sobolev_norm(c, s, 64) == doctest::Approx(std::pow(2.0, 0.5 * s)).epsilon(1e-12));
    const auto U = Suspension::prototype_a1(6.0);
    const double n256 = sobolev_norm(U, 2.5, 256);
    const double n512 = sobolev_norm(U, 2.5, 512);
    CHECK(std::abs(n512 - n256) <= 0.01 * n512);
  }

  TEST_CASE("Sobolev norm is nondecreasing in s") {
    const auto U = Suspension::prototype_a1(1.0);
    const auto g = fourier_grid([&](double x1, double x2) { return std::sqrt(a1_reference(1.0, x1, x2)); }, 64);
    double last = 0.0;
    for (double s = 0.0; s <= 3.0; s += 0.25) {
      const double v = sobolev_norm(g, s);
      CHECK(v >= last);
      last = v;
    }
    CHECK(sobolev_norm(U, 1.0, 64) == doctest::Approx(sobolev_norm(g, 1.0)).epsilon(1e-10));
  }

  TEST_CASE("quadrature spec validation") {
    QuadratureSpec s;
    s.abs_tol = -1.0;
    CHECK_THROWS_AS(s.validate(), Error);
  }
}
