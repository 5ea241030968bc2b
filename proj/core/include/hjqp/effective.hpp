#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hjqp/quad.hpp"
#include "hjqp/rate_fit.hpp"
#include "hjqp/torus.hpp"

namespace hjqp {

struct MuRow {
  double mu = 0.0;
  double phi = 0.0;   // int sqrt(2 (mu + U))
  double dphi = 0.0;  // int (2 (mu + U))^{-1/2}; +inf at mu = 0 when divergent
};

struct EffectiveOptions {
  double mu_max = 10.0;
  int table_points = 60;
  // When set, mu_max is doubled until phi(mu_max) >= cover_p.
  std::optional<double> cover_p;
};

// H(p) for H(x,p) = p^2/2 - U(xi x), through its inverse phi.
class EffectiveModel {
 public:
  static EffectiveModel build(Potential P, const QuadratureSpec& spec, const EffectiveOptions& opt = {});
  static EffectiveModel from_rows(Potential P, const QuadratureSpec& spec, std::vector<MuRow> rows);

  const Potential& potential() const noexcept { return P_; }
  const QuadratureSpec& quad_spec() const noexcept { return spec_; }
  const std::vector<MuRow>& table() const noexcept { return rows_; }
  double p0() const noexcept { return rows_.front().phi; }
  double mu_max() const noexcept { return rows_.back().mu; }
  double p_max() const noexcept { return rows_.back().phi; }
  // True when int U^{-1/2} diverges, in which case H'(p0+) = 0.
  bool flat_edge() const noexcept { return !std::isfinite(rows_.front().dphi); }
  double right_derivative_at_p0() const noexcept;

  // Fresh quadratures.
  double phi_exact(double mu) const;
  double dphi_exact(double mu) const;
  double inv_cube_integral(double mu) const;  // int (2 (mu + U))^{-3/2}
  // Table interpolation (monotone cubic Hermite in log mu) and its error bound on the
  // containing interval, measured against a fresh value at build time.
  double phi_interp(double mu) const;
  double interp_error(double mu) const;

  double phi(double mu, double tol = 0.0) const;
  double H(double p) const;
  double H_prime(double p) const;
  double H_second(double p) const;
  // exact = false uses table interpolation only (coarse searches).
  double L(double q, bool exact = true) const;
  // Largest |q| for which L is available.
  double q_max() const noexcept;

  // Hash of potential spec, quadrature tolerances and mu grid.
  std::string cache_key() const;
  void save_csv(const std::string& path) const;
  // Returns nullopt when the file is missing or its key differs.
  static std::optional<EffectiveModel> load_csv(const std::string& path, const Potential& P,
                                                const QuadratureSpec& spec, const EffectiveOptions& opt);
  static std::string cache_key_for(const Potential& P, const QuadratureSpec& spec, const EffectiveOptions& opt);

 private:
  EffectiveModel(Potential P, QuadratureSpec spec) : P_(std::move(P)), spec_(spec) {}
  std::size_t interval_of(double mu) const;
  double mu_for_slope(double q, bool exact) const;

  Potential P_;
  QuadratureSpec spec_;
  std::vector<MuRow> rows_;
  std::vector<double> interval_error_;
  std::string key_;
};

struct RegularityReport {
  double gamma = 0.0;
  double predicted_holder_beta = 0.0;
  bool log_flag = false;  // gamma = 2: H' ~ 1/|log H|
  double measured_prime_at_p0 = 0.0;
  RateFit asymptotic_fit;
};

struct CorrectorGrowth {
  std::vector<double> t;
  std::vector<double> v;         // v_p(t)
  std::vector<double> envelope;  // max_{s <= t} |v_p(s)| on the panel grid
  RateFit fit;                   // log(envelope / t) against log t; theta = -exponent
};

double compute_p0(const Potential& P, const QuadratureSpec& spec);
double phi(const EffectiveModel& M, double mu);
double effective_H(const EffectiveModel& M, double p);
double effective_H_prime(const EffectiveModel& M, double p);
double effective_H_second(const EffectiveModel& M, double p);
double effective_L(const EffectiveModel& M, double q);
// v_p(x) = int_0^x (sqrt(2 (H(p) + U)) - |p|), odd in p.
double corrector_value(const EffectiveModel& M, double p, double x);
// Same at several points, solving for H(p) once.
std::vector<double> corrector_values(const EffectiveModel& M, double p, const std::vector<double>& xs);
CorrectorGrowth corrector_growth(const EffectiveModel& M, double p, const std::vector<double>& t_grid);
RateFit corrector_growth_fit(const EffectiveModel& M, double p, const std::vector<double>& t_grid);
RegularityReport regularity_report(const EffectiveModel& M, double gamma);
double predicted_holder_beta(double gamma);

}  // namespace hjqp
