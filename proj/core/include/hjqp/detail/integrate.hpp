#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hjqp/errors.hpp"
#include "hjqp/gauss_kronrod.hpp"
#include "hjqp/quad.hpp"

namespace hjqp::detail {

template <std::size_t M>
struct Estimate {
  gk::Vec<M> value{};
  gk::Vec<M> error{};
  bool converged = true;
};

template <std::size_t M>
void accumulate(Estimate<M>& into, const gk::Result<M>& r) {
  for (std::size_t m = 0; m < M; ++m) {
    into.value[m] += r.value[m];
    into.error[m] += r.error[m];
  }
  if (!r.converged) into.converged = false;
}

// Iterated adaptive integral over [x0,x1] x [y0,y1].
template <std::size_t M, class F>
Estimate<M> rectangle(F& f, double x0, double x1, double y0, double y1, double abs_tol,
                      double rel_tol, int max_intervals) {
  Estimate<M> est;
  bool inner_ok = true;
  const double inner_abs = abs_tol / (4.0 * std::max(x1 - x0, 1e-300));
  auto outer = [&](double x) {
    auto g = [&](double y) { return f(x, y); };
    auto r = gk::adaptive<M>(g, y0, y1, inner_abs, rel_tol / 4.0, max_intervals);
    if (!r.converged) inner_ok = false;
    return r.value;
  };
  accumulate(est, gk::adaptive<M>(outer, x0, x1, abs_tol, rel_tol, max_intervals));
  if (!inner_ok) est.converged = false;
  return est;
}

template <std::size_t M, class F>
Estimate<M> torus_offset(F&& f, const QuadratureSpec& spec) {
  using std::numbers::pi;
  constexpr int kMaxDoublings = 8;
  constexpr int kDivergenceRun = 6;
  constexpr double kGrowth = 0.1;

  const double R = spec.polar_refinement_radius;
  const double piece_abs = spec.abs_tol / 10.0;
  Estimate<M> total;

  const double e[4] = {-0.5, -R, R, 0.5};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == 1 && j == 1) continue;
      auto part = rectangle<M>(f, e[i], e[i + 1], e[j], e[j + 1], piece_abs, spec.rel_tol,
                               spec.max_subdivisions);
      for (std::size_t m = 0; m < M; ++m) {
        total.value[m] += part.value[m];
        total.error[m] += part.error[m];
      }
      if (!part.converged) total.converged = false;
    }
  }

  // Square |h|_inf <= R as four triangles; r = (R / cos t) e^{-s}, dA = r^2 ds dt.
  gk::Vec<M> sum{};
  std::vector<double> partial;
  int run = 0;
  bool settled = false;
  for (int d = 0; d <= kMaxDoublings && !settled; ++d) {
    const double s0 = d == 0 ? 0.0 : std::ldexp(1.0, d - 1);
    const double s1 = std::ldexp(1.0, d);
    Estimate<M> inc;
    for (int k = 0; k < 4; ++k) {
      const double rot = 0.5 * pi * k;
      auto integrand = [&](double t, double s) {
        gk::Vec<M> out{};
        const double r = R / std::cos(t) * std::exp(-s);
        if (r < 1e-150) return out;
        const double ang = t + rot;
        const gk::Vec<M> v = f(r * std::cos(ang), r * std::sin(ang));
        for (std::size_t m = 0; m < M; ++m) out[m] = v[m] * r * r;
        return out;
      };
      auto part = rectangle<M>(integrand, -0.25 * pi, 0.25 * pi, s0, s1, piece_abs / 4.0,
                               spec.rel_tol, spec.max_subdivisions);
      for (std::size_t m = 0; m < M; ++m) {
        inc.value[m] += part.value[m];
        inc.error[m] += part.error[m];
      }
      if (!part.converged) inc.converged = false;
    }
    bool growing = false;
    bool small = true;
    for (std::size_t m = 0; m < M; ++m) {
      if (!std::isfinite(inc.value[m])) {
        partial.push_back(inc.value[m]);
        throw DivergenceSuspected("torus integral is not finite near the refinement centre",
                                  partial);
      }
      if (d > 0 && std::abs(inc.value[m]) > kGrowth * std::abs(sum[m])) growing = true;
      if (std::abs(inc.value[m]) > std::max(piece_abs, spec.rel_tol * std::abs(sum[m] + inc.value[m])))
        small = false;
      sum[m] += inc.value[m];
      total.error[m] += inc.error[m];
    }
    if (!inc.converged) total.converged = false;
    partial.push_back(sum[0]);
    run = growing ? run + 1 : 0;
    if (run >= kDivergenceRun)
      throw DivergenceSuspected("partial sums keep growing under radial refinement", partial);
    if (d > 0 && small) settled = true;
  }
  if (!settled)
    throw DivergenceSuspected("radial refinement did not converge", partial);
  for (std::size_t m = 0; m < M; ++m) total.value[m] += sum[m];
  return total;
}

// int_a^b kernel(base, t) dt along an orbit, split into panels of length h; each panel
// [p0, p1] is integrated in the local variable t in [0, p1 - p0] with base = p0.
template <std::size_t M, class K>
Estimate<M> along(K&& kernel, double a, double b, double h, const QuadratureSpec& spec) {
  Estimate<M> est;
  if (a == b) return est;
  const double sign = b > a ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const long n = std::max(1L, long(std::ceil((hi - lo) / h)));
  for (long i = 0; i < n; ++i) {
    const double p0 = lo + double(i) * h;
    const double p1 = i + 1 == n ? hi : lo + double(i + 1) * h;
    if (p1 <= p0) continue;
    auto local = [&kernel, p0](double t) { return kernel(p0, t); };
    auto r = gk::adaptive<M>(local, 0.0, p1 - p0, spec.abs_tol * (p1 - p0), spec.rel_tol,
                             spec.max_subdivisions);
    accumulate(est, r);
  }
  if (sign < 0)
    for (auto& v : est.value) v = -v;
  return est;
}

}  // namespace hjqp::detail
