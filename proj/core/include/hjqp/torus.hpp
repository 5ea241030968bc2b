#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjqp/errors.hpp"

namespace hjqp {

// Frequency vector xi in R^n together with an optional empirical Diophantine pair.
class Frequency {
 public:
  explicit Frequency(std::vector<double> components);

  std::size_t dim() const noexcept { return xi_.size(); }
  const std::vector<double>& components() const noexcept { return xi_; }
  double operator[](std::size_t i) const { return xi_[i]; }
  double norm() const noexcept;

  std::optional<double> estimated_sigma() const noexcept { return sigma_; }
  std::optional<double> estimated_C() const noexcept { return C_; }
  int resonance_cutoff() const noexcept { return K_; }

  // Runs estimate_diophantine and stores the result; throws on resonance.
  Frequency with_estimate(int K) const;

 private:
  std::vector<double> xi_;
  std::optional<double> sigma_;
  std::optional<double> C_;
  int K_ = 0;
};

struct DiophantineEstimate {
  bool resonant = false;
  double sigma = 0.0;
  double C = 0.0;
  int K = 0;
  bool above_grid = false;      // no grid sigma was admissible; sigma is the top of the grid
  std::vector<int> witness;     // kappa attaining the tight constant (or the resonance)
  double witness_dot = 0.0;     // |xi . witness|
};

// Scans 0 < |kappa| <= K. sigma is searched on {n-1, n-1+0.05, ..., n+1}; a value is
// admissible when min |xi.kappa||kappa|^sigma over |kappa| <= K stays within a factor
// 10 of the same minimum over |kappa| <= 10.
DiophantineEstimate estimate_diophantine(std::span<const double> xi, int K);

std::vector<double> diophantine_sigma_grid(std::size_t n);

enum class SuspensionKind { prototype_a1, prototype_a2, trig_polynomial };

std::string to_string(SuspensionKind kind);

struct FourierMode {
  std::vector<int> k;
  std::complex<double> c;
};

// A nonnegative continuous function on the torus.
class Suspension {
 public:
  static Suspension prototype_a1(double gamma);
  static Suspension prototype_a2(double gamma);
  // Modes must be Hermitian symmetric (c_{-k} = conj c_k); missing partners are added.
  static Suspension trig_polynomial(std::vector<FourierMode> modes, std::size_t dim = 2);
  static Suspension constant(double c, std::size_t dim = 2);

  SuspensionKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  double gamma() const noexcept { return gamma_; }
  const std::vector<FourierMode>& modes() const noexcept { return modes_; }
  const std::vector<double>& minimizer() const noexcept { return minimizer_; }
  double min_value() const noexcept { return min_value_; }
  double sup_norm() const noexcept { return sup_norm_; }
  // Bound on |grad U|; infinite for prototypes with gamma < 1.
  double lipschitz_bound() const noexcept { return lipschitz_; }
  // Tolerance below zero accepted when evaluating trig polynomials.
  double margin() const noexcept { return margin_; }
  bool is_constant() const noexcept;

  // Value at a torus point (components reduced mod 1). No sign check.
  double value(const double* x) const noexcept;
  // U(x0 + h) evaluated accurately for small offsets h from the minimizer.
  double value_offset(const double* h) const noexcept;
  // U0 = 2 sin^2(pi h1) + 2 sin^2(pi h2) for prototypes; value() for trig polynomials.
  double base_offset(const double* h) const noexcept;

 private:
  Suspension() = default;
  void certify();

  SuspensionKind kind_ = SuspensionKind::trig_polynomial;
  std::size_t dim_ = 2;
  double gamma_ = 1.0;
  std::vector<FourierMode> modes_;
  std::vector<double> minimizer_;
  double min_value_ = 0.0;
  double sup_norm_ = 0.0;
  double lipschitz_ = 0.0;
  double margin_ = 0.0;
};

double eval_suspension(const Suspension& U, std::span<const double> x);

class Potential {
 public:
  Potential(Suspension U, Frequency xi);

  const Suspension& suspension() const noexcept { return U_; }
  const Frequency& frequency() const noexcept { return xi_; }

  // U(frac(xi x)), the value entering V = -U along the orbit.
  double U_along(double x) const noexcept { return U_along(x, 0.0); }
  // U at x = base + t, with xi * base split exactly so that nodes near a large base keep
  // full phase accuracy.
  double U_along(double base, double t) const noexcept;
  double V(double x) const noexcept { return -U_along(x); }
  double sup_U() const noexcept { return U_.sup_norm(); }
  // True when r - V vanishes somewhere on [a, b].
  bool has_pole(double r, double a, double b) const noexcept;

 private:
  Suspension U_;
  Frequency xi_;
};

double eval_potential(const Potential& P, double x);

inline double frac(double x) noexcept { return x - std::floor(x); }

// frac(xi (base + t)) for small |t|; the product xi * base is split with fma.
inline double orbit_phase(double xi, double base, double t = 0.0) noexcept {
  const double p = xi * base;
  const double e = std::fma(xi, base, -p);
  return frac((p - std::floor(p)) + (e + xi * t));
}

}  // namespace hjqp
