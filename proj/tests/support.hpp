#pragma once

// Reference integrators used as independent oracles. None of them shares code with the
// adaptive Gauss-Kronrod machinery of the library.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace hjqp::test {

inline constexpr double pi = std::numbers::pi;
inline const double sqrt2 = std::sqrt(2.0);

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Composite Gauss-Legendre on [a, b]: `cells` equal cells with `order` nodes each.
inline double composite_gl(const std::function<double(double)>& f, double a, double b, int cells, int order = 8) {
  const auto [x, w] = gauss_legendre(order);
  const double h = (b - a) / cells;
  double s = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double m = a + (c + 0.5) * h;
    double cs = 0.0;
    for (int i = 0; i < order; ++i) cs += w[i] * f(m + 0.5 * h * x[i]);
    s += 0.5 * h * cs;
  }
  return s;
}

// Tensor composite Gauss-Legendre over [0,1)^2 with cell edges on multiples of 1/cells.
inline double composite_gl_2d(const std::function<double(double, double)>& f, int cells, int order = 8) {
  const auto [x, w] = gauss_legendre(order);
  const double h = 1.0 / cells;
  double s = 0.0;
  for (int i = 0; i < cells; ++i) {
    for (int a = 0; a < order; ++a) {
      const double x1 = (i + 0.5 + 0.5 * x[a]) * h;
      double row = 0.0;
      for (int j = 0; j < cells; ++j) {
        double cs = 0.0;
        for (int b = 0; b < order; ++b) cs += w[b] * f(x1, (j + 0.5 + 0.5 * x[b]) * h);
        row += cs;
      }
      s += w[a] * row;
    }
  }
  return s * 0.25 * h * h;
}

// Composite Simpson on [a, b] with an even number of intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, long intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (long i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Classical RK4 for the scalar autonomous ODE y' = g(y).
inline double rk4(const std::function<double(double)>& g, double y, double s, double step) {
  const long n = static_cast<long>(std::ceil(s / step));
  const double h = s / n;
  for (long i = 0; i < n; ++i) {
    const double k1 = g(y);
    const double k2 = g(y + 0.5 * h * k1);
    const double k3 = g(y + 0.5 * h * k2);
    const double k4 = g(y + h * k3);
    y += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  return y;
}

// Prototype suspensions written directly from their definitions.
inline double a1_reference(double gamma, double x1, double x2) {
  const double s1 = std::sin(pi * (x1 - 0.25)), s2 = std::sin(pi * (x2 - 0.25));
  return std::pow(2 * s1 * s1 + 2 * s2 * s2, gamma);
}
inline double a2_reference(double gamma, double x1, double x2) {
  const double s1 = std::sin(pi * x1), s2 = std::sin(pi * x2);
  return std::pow(2 * s1 * s1 + 2 * s2 * s2, gamma);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace hjqp::test
