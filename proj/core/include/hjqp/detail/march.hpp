#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "hjqp/errors.hpp"
#include "hjqp/gauss_kronrod.hpp"
#include "hjqp/quad.hpp"

namespace hjqp::detail {

template <std::size_t M>
struct MarchHit {
  double x = 0.0;
  gk::Vec<M> integral{};
};

// Marches x = x0 + dir u, u >= 0, over panels of length h and accumulates
// int kernel(base, dir tau) dtau. Component 0 must be positive; targets are hit on it.
template <std::size_t M, class K>
class OrbitMarch {
 public:
  OrbitMarch(K kernel, double x0, double dir, double h, const QuadratureSpec& spec)
      : k_(std::move(kernel)), x0_(x0), dir_(dir), h_(h), spec_(spec) {}

  double base() const noexcept { return x0_ + dir_ * double(n_) * h_; }
  double panel_length() const noexcept { return std::abs(x0_ + dir_ * double(n_ + 1) * h_ - base()); }
  const gk::Vec<M>& total() const noexcept { return total_; }

  const gk::Vec<M>& panel() {
    if (!cached_) {
      panel_ = integrate(panel_length());
      cached_ = true;
    }
    return panel_;
  }

  void step() {
    panel();
    for (std::size_t m = 0; m < M; ++m) total_[m] += panel_[m];
    ++n_;
    cached_ = false;
  }

  // Position where component 0 of the running integral equals target (>= total()[0]).
  MarchHit<M> advance_to(double target, double tol) {
    while (total_[0] + panel()[0] < target) step();
    return solve(target, tol);
  }

  // Same, for a target inside the current panel.
  MarchHit<M> hit(double target, double tol) {
    panel();
    return solve(target, tol);
  }

 private:
  gk::Vec<M> integrate(double len) const {
    const double b = base();
    auto f = [this, b](double tau) { return k_(b, dir_ * tau); };
    const auto r = gk::adaptive<M>(f, 0.0, len, spec_.abs_tol * len, spec_.rel_tol, spec_.max_subdivisions);
    for (std::size_t m = 0; m < M; ++m) {
      if (!std::isfinite(r.value[m]))
        fail(ErrorKind::numerical, "orbit integral is not finite near x = " + std::to_string(b));
    }
    if (!r.converged)
      fail(ErrorKind::numerical, "orbit quadrature exhausted its subdivision budget near x = " + std::to_string(b));
    return r.value;
  }

  MarchHit<M> solve(double target, double tol) const {
    const double rem = target - total_[0];
    const double len = panel_length();
    MarchHit<M> hit;
    if (rem <= 0.0) {
      hit.x = base();
      hit.integral = total_;
      return hit;
    }
    double lo = 0.0, hi = len;
    double tau = len * std::min(1.0, rem / panel_[0]);
    gk::Vec<M> best{};
    double best_tau = tau, best_res = std::numeric_limits<double>::infinity();
    const double b = base();
    for (int it = 0; it < 200; ++it) {
      const auto v = integrate(tau);
      const double res = v[0] - rem;
      if (std::abs(res) < best_res) {
        best_res = std::abs(res);
        best_tau = tau;
        best = v;
      }
      if (std::abs(res) <= tol) break;
      if (res < 0.0)
        lo = tau;
      else
        hi = tau;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * len) break;
      const double d = k_(b, dir_ * tau)[0];
      double next = tau - res / d;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      tau = next;
    }
    hit.x = b + dir_ * best_tau;
    for (std::size_t m = 0; m < M; ++m) hit.integral[m] = total_[m] + best[m];
    return hit;
  }

  K k_;
  double x0_, dir_, h_;
  QuadratureSpec spec_;
  long n_ = 0;
  gk::Vec<M> total_{};
  gk::Vec<M> panel_{};
  bool cached_ = false;
};

}  // namespace hjqp::detail
