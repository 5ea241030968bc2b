#include "hjqp/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hjqp/errors.hpp"

namespace hjqp {

std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::power_law: return "power";
    case FitModel::log_law: return "log";
    case FitModel::reciprocal_log_law: return "reciprocal-log";
  }
  return "?";
}

namespace {

RateFit linear(const std::vector<double>& X, const std::vector<double>& Y, FitModel model) {
  const std::size_t n = X.size();
  if (n < 4) fail(ErrorKind::config, "rate fits need at least four samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  if (sxx == 0.0) fail(ErrorKind::flat_fit, "rate fit abscissae are all equal");
  RateFit f;
  f.model = model;
  f.sample_count = int(n);
  f.exponent = sxy / sxx;
  f.log_constant = my - f.exponent * mx;
  f.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return f;
}

}  // namespace

RateFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::config, "fit inputs differ in length");
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i]))
      fail(ErrorKind::flat_fit, "power-law fit needs positive finite samples");
    X.push_back(std::log(x[i]));
    Y.push_back(std::log(y[i]));
  }
  return linear(X, Y, FitModel::power_law);
}

RateFit fit_log_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::config, "fit inputs differ in length");
  std::vector<double> X, Y(y.begin(), y.end());
  for (double v : x) X.push_back(std::log(v));
  return linear(X, Y, FitModel::log_law);
}

RateFit fit_reciprocal_log_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::config, "fit inputs differ in length");
  std::vector<double> X, Y(y.begin(), y.end());
  for (double v : x) {
    const double l = std::abs(std::log(v));
    if (l == 0.0) fail(ErrorKind::config, "reciprocal-log fit undefined at 1");
    X.push_back(1.0 / l);
  }
  return linear(X, Y, FitModel::reciprocal_log_law);
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) fail(ErrorKind::config, "invalid geometric grid");
  std::vector<double> g(points);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * double(i) / double(points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace hjqp
