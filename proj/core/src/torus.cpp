#include "hjqp/torus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace hjqp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kResonanceThreshold = 1e-12;
constexpr int kReferenceCutoff = 10;
constexpr double kAdmissibleRatio = 0.1;
constexpr std::size_t kMaxDim = 16;

double euclid(std::span<const int> k) {
  double s = 0.0;
  for (int v : k) s += double(v) * double(v);
  return std::sqrt(s);
}

struct Candidate {
  std::vector<int> k;
  double dot;
  double norm;
};

// Lattice points that can attain min |xi.k||k|^sigma for sigma >= 0. For n = 2 only the
// nearest and next-nearest k2 for each k1 can matter, since any other k has
// |xi.k| >= 2.5|xi2| while k = (0, 1) gives |xi2|.
std::vector<Candidate> candidates(std::span<const double> xi, int K) {
  std::vector<Candidate> out;
  const std::size_t n = xi.size();
  if (n == 2) {
    const double K2 = double(K) * double(K);
    for (int k1 = 0; k1 <= K; ++k1) {
      const double centre = -xi[0] * k1 / xi[1];
      const long base = std::lround(centre);
      for (long d = -2; d <= 2; ++d) {
        const long k2 = base + d;
        if (k1 == 0 && k2 <= 0) continue;
        const double nn = double(k1) * k1 + double(k2) * k2;
        if (nn > K2 || nn == 0.0) continue;
        Candidate c;
        c.k = {k1, int(k2)};
        c.dot = std::abs(xi[0] * k1 + xi[1] * double(k2));
        c.norm = std::sqrt(nn);
        out.push_back(std::move(c));
      }
    }
    return out;
  }
  // General n: brute force over the box, keeping one of each +-k pair.
  std::vector<int> k(n, -K);
  const double K2 = double(K) * double(K);
  while (true) {
    double nn = 0.0;
    for (int v : k) nn += double(v) * v;
    bool positive = false;
    for (int v : k) {
      if (v != 0) {
        positive = v > 0;
        break;
      }
    }
    if (positive && nn <= K2) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += xi[i] * k[i];
      out.push_back({k, std::abs(dot), std::sqrt(nn)});
    }
    std::size_t i = 0;
    while (i < n && k[i] == K) k[i++] = -K;
    if (i == n) break;
    ++k[i];
  }
  return out;
}

double tight_constant(const std::vector<Candidate>& cs, double sigma, double cutoff,
                      const Candidate** arg = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cs) {
    if (c.norm > cutoff) continue;
    const double v = c.dot * std::pow(c.norm, sigma);
    if (v < best) {
      best = v;
      if (arg) *arg = &c;
    }
  }
  return best;
}

}  // namespace

Frequency::Frequency(std::vector<double> components) : xi_(std::move(components)) {
  if (xi_.size() < 2) fail(ErrorKind::config, "frequency needs at least two components");
  if (xi_.size() > kMaxDim) fail(ErrorKind::config, "frequency dimension too large");
  for (double v : xi_) {
    if (!(std::isfinite(v)) || v == 0.0)
      fail(ErrorKind::config, "frequency components must be finite and nonzero");
  }
}

double Frequency::norm() const noexcept {
  double s = 0.0;
  for (double v : xi_) s += v * v;
  return std::sqrt(s);
}

Frequency Frequency::with_estimate(int K) const {
  const auto est = estimate_diophantine(xi_, K);
  if (est.resonant) fail(ErrorKind::resonant_frequency, "frequency is resonant");
  Frequency out = *this;
  out.sigma_ = est.sigma;
  out.C_ = est.C;
  out.K_ = K;
  return out;
}

std::vector<double> diophantine_sigma_grid(std::size_t n) {
  std::vector<double> g;
  for (int i = 0; i <= 40; ++i) g.push_back(double(n) - 1.0 + 0.05 * i);
  return g;
}

DiophantineEstimate estimate_diophantine(std::span<const double> xi, int K) {
  if (K < 2) fail(ErrorKind::config, "Diophantine cutoff must be at least 2");
  DiophantineEstimate est;
  est.K = K;
  const auto cs = candidates(xi, K);
  for (const auto& c : cs) {
    if (c.dot < kResonanceThreshold) {
      est.resonant = true;
      est.witness = c.k;
      est.witness_dot = c.dot;
      return est;
    }
  }
  const auto grid = diophantine_sigma_grid(xi.size());
  const double ref = std::min<double>(K, kReferenceCutoff);
  est.above_grid = true;
  est.sigma = grid.back();
  for (double sigma : grid) {
    const double full = tight_constant(cs, sigma, K);
    const double small = tight_constant(cs, sigma, ref);
    if (full >= kAdmissibleRatio * small) {
      est.sigma = sigma;
      est.above_grid = false;
      break;
    }
  }
  const Candidate* arg = nullptr;
  est.C = tight_constant(cs, est.sigma, K, &arg);
  if (arg) {
    est.witness = arg->k;
    est.witness_dot = arg->dot;
  }
  return est;
}

std::string to_string(SuspensionKind kind) {
  switch (kind) {
    case SuspensionKind::prototype_a1: return "A1";
    case SuspensionKind::prototype_a2: return "A2";
    case SuspensionKind::trig_polynomial: return "trig";
  }
  return "?";
}

Suspension Suspension::prototype_a1(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    fail(ErrorKind::config, "prototype exponent gamma must be positive");
  Suspension s;
  s.kind_ = SuspensionKind::prototype_a1;
  s.gamma_ = gamma;
  s.minimizer_ = {0.25, 0.25};
  s.min_value_ = 0.0;
  s.sup_norm_ = std::pow(4.0, gamma);
  s.lipschitz_ = gamma >= 1.0 ? gamma * std::pow(4.0, gamma - 1.0) * 2.0 * kPi * std::sqrt(2.0)
                              : std::numeric_limits<double>::infinity();
  return s;
}

Suspension Suspension::prototype_a2(double gamma) {
  Suspension s = prototype_a1(gamma);
  s.kind_ = SuspensionKind::prototype_a2;
  s.minimizer_ = {0.0, 0.0};
  return s;
}

Suspension Suspension::constant(double c, std::size_t dim) {
  return trig_polynomial({FourierMode{std::vector<int>(dim, 0), {c, 0.0}}}, dim);
}

Suspension Suspension::trig_polynomial(std::vector<FourierMode> modes, std::size_t dim) {
  if (dim < 2 || dim > kMaxDim) fail(ErrorKind::config, "suspension dimension out of range");
  std::map<std::vector<int>, std::complex<double>> merged;
  for (const auto& m : modes) {
    if (m.k.size() != dim) fail(ErrorKind::config, "Fourier mode has wrong dimension");
    merged[m.k] += m.c;
  }
  // Hermitian completion: a lone k gets the partner -k with conj c.
  std::map<std::vector<int>, std::complex<double>> full = merged;
  for (const auto& [k, c] : merged) {
    std::vector<int> mk(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) mk[i] = -k[i];
    if (!merged.count(mk)) full[mk] = std::conj(c);
  }
  for (const auto& [k, c] : full) {
    std::vector<int> mk(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) mk[i] = -k[i];
    if (std::abs(full[mk] - std::conj(c)) > 1e-12 * (1.0 + std::abs(c)))
      fail(ErrorKind::invalid_suspension, "trig polynomial coefficients are not Hermitian");
  }
  Suspension s;
  s.kind_ = SuspensionKind::trig_polynomial;
  s.dim_ = dim;
  s.gamma_ = 1.0;
  for (const auto& [k, c] : full) {
    if (c != std::complex<double>(0.0, 0.0)) s.modes_.push_back({k, c});
  }
  s.certify();
  return s;
}

bool Suspension::is_constant() const noexcept {
  if (kind_ != SuspensionKind::trig_polynomial) return false;
  for (const auto& m : modes_) {
    for (int v : m.k)
      if (v != 0) return false;
  }
  return true;
}

void Suspension::certify() {
  double lip = 0.0;
  double hess = 0.0;
  for (const auto& m : modes_) {
    const double kn = euclid(m.k);
    lip += std::abs(m.c) * 2.0 * kPi * kn;
    hess += std::abs(m.c) * 4.0 * kPi * kPi * kn * kn;
  }
  lipschitz_ = lip;
  // 1024 points per axis in two dimensions; coarser in higher dimensions.
  std::size_t N = 1024;
  if (dim_ > 2) N = std::max<std::size_t>(8, std::size_t(std::pow(double(1 << 24), 1.0 / dim_)));
  const double h = 1.0 / double(N);
  const double reach = h * std::sqrt(double(dim_)) / 2.0;
  margin_ = lip > 0.0 ? std::min(lip * reach, lip * reach * 0.5 + 0.5 * hess * reach * reach) + 1e-14 : 0.0;

  std::vector<std::size_t> idx(dim_, 0);
  std::array<double, kMaxDim> x{};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<double> arg(dim_, 0.0);
  while (true) {
    for (std::size_t i = 0; i < dim_; ++i) x[i] = double(idx[i]) * h;
    const double v = value(x.data());
    if (v < lo) {
      lo = v;
      for (std::size_t i = 0; i < dim_; ++i) arg[i] = x[i];
    }
    hi = std::max(hi, v);
    std::size_t i = 0;
    while (i < dim_ && idx[i] == N - 1) idx[i++] = 0;
    if (i == dim_) break;
    ++idx[i];
  }
  if (lo < -1e-12 * (1.0 + std::abs(hi)))
    fail(ErrorKind::invalid_suspension, "trig polynomial takes negative values on the scan grid");
  min_value_ = std::max(lo, 0.0);
  minimizer_ = arg;
  sup_norm_ = hi + margin_;
}

double Suspension::base_offset(const double* h) const noexcept {
  if (kind_ == SuspensionKind::trig_polynomial) {
    std::array<double, kMaxDim> x{};
    for (std::size_t i = 0; i < dim_; ++i) x[i] = minimizer_[i] + h[i];
    return value(x.data());
  }
  const double s1 = std::sin(kPi * h[0]);
  const double s2 = std::sin(kPi * h[1]);
  return 2.0 * (s1 * s1 + s2 * s2);
}

double Suspension::value_offset(const double* h) const noexcept {
  const double b = base_offset(h);
  if (kind_ == SuspensionKind::trig_polynomial) return b;
  return gamma_ == 1.0 ? b : std::pow(b, gamma_);
}

double Suspension::value(const double* x) const noexcept {
  if (kind_ != SuspensionKind::trig_polynomial) {
    const double h[2] = {x[0] - minimizer_[0], x[1] - minimizer_[1]};
    return value_offset(h);
  }
  double sum = 0.0;
  for (const auto& m : modes_) {
    double ph = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) ph += double(m.k[i]) * x[i];
    if (ph == 0.0) {
      sum += m.c.real();
      continue;
    }
    ph *= 2.0 * kPi;
    sum += m.c.real() * std::cos(ph) - m.c.imag() * std::sin(ph);
  }
  return sum;
}

double eval_suspension(const Suspension& U, std::span<const double> x) {
  if (x.size() != U.dim()) fail(ErrorKind::config, "torus point has wrong dimension");
  const double v = U.value(x.data());
  if (U.kind() == SuspensionKind::trig_polynomial && v < -U.margin())
    fail(ErrorKind::invalid_suspension, "suspension evaluated to a negative value");
  return v;
}

Potential::Potential(Suspension U, Frequency xi) : U_(std::move(U)), xi_(std::move(xi)) {
  if (U_.dim() != xi_.dim())
    fail(ErrorKind::config, "suspension and frequency dimensions differ");
}

double Potential::U_along(double base, double t) const noexcept {
  std::array<double, kMaxDim> y{};
  const auto& c = xi_.components();
  for (std::size_t i = 0; i < c.size(); ++i) y[i] = orbit_phase(c[i], base, t);
  return U_.value(y.data());
}

bool Potential::has_pole(double r, double a, double b) const noexcept {
  if (r > 0.0) return false;
  if (r < 0.0) return true;
  if (U_.min_value() > 0.0) return false;
  // The orbit meets the zero set of U only through x = 0, and only when the minimizer
  // is the origin of the torus.
  for (double m : U_.minimizer()) {
    if (frac(m) != 0.0) return false;
  }
  return a <= 0.0 && 0.0 <= b;
}

double eval_potential(const Potential& P, double x) {
  const auto& c = P.frequency().components();
  std::array<double, kMaxDim> y{};
  for (std::size_t i = 0; i < c.size(); ++i) y[i] = orbit_phase(c[i], x);
  return -eval_suspension(P.suspension(), std::span<const double>(y.data(), c.size()));
}

}  // namespace hjqp
