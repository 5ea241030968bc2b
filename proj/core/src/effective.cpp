#include "hjqp/effective.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hjqp/detail/integrate.hpp"

namespace hjqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_planar(const Potential& P) {
  if (P.suspension().dim() != 2) fail(ErrorKind::config, "effective model needs a suspension on the 2-torus");
}

// Torus integral of g(U) written around the minimizer of U.
template <std::size_t M, class G>
gk::Vec<M> integrate_u(const Suspension& U, const QuadratureSpec& spec, G g) {
  auto f = [&U, &g](double h1, double h2) {
    const double h[2] = {h1, h2};
    return g(U.value_offset(h));
  };
  return detail::torus_offset<M>(f, spec).value;
}

struct Phi3 {
  double phi, dphi, inv3;
};

// phi is assembled as p0 + int 2 mu / (sqrt(2 (mu + U)) + sqrt(2 U)) so that small mu keeps
// full relative accuracy in phi - p0.
Phi3 phi3(const Suspension& U, const QuadratureSpec& spec, double mu, double p0) {
  auto v = integrate_u<3>(U, spec, [mu](double u) {
    const double w = 2.0 * (mu + u);
    const double s = std::sqrt(w);
    return gk::Vec<3>{2.0 * mu / (s + std::sqrt(2.0 * u)), 1.0 / s, 1.0 / (w * s)};
  });
  return {p0 + v[0], v[1], v[2]};
}

double hermite(double x0, double x1, double f0, double f1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string describe(const Potential& P) {
  std::ostringstream os;
  const auto& U = P.suspension();
  os << to_string(U.kind()) << ';' << hexfloat(U.gamma()) << ';';
  for (const auto& m : U.modes()) {
    for (int k : m.k) os << k << ',';
    os << hexfloat(m.c.real()) << ',' << hexfloat(m.c.imag()) << ';';
  }
  os << "xi";
  for (double v : P.frequency().components()) os << ';' << hexfloat(v);
  return os.str();
}

double geometric_mid(double a, double b) { return a > 0.0 ? std::sqrt(a * b) : 0.5 * (a + b); }

}  // namespace

double compute_p0(const Potential& P, const QuadratureSpec& spec) {
  require_planar(P);
  spec.validate();
  return integrate_u<1>(P.suspension(), spec, [](double u) { return gk::Vec<1>{std::sqrt(2.0 * u)}; })[0];
}

std::string EffectiveModel::cache_key_for(const Potential& P, const QuadratureSpec& spec,
                                          const EffectiveOptions& opt) {
  std::ostringstream os;
  os << describe(P) << "|quad;" << hexfloat(spec.abs_tol) << ';' << hexfloat(spec.rel_tol) << ';'
     << spec.max_subdivisions << ';' << hexfloat(spec.polar_refinement_radius) << "|mu;"
     << hexfloat(opt.mu_max) << ';' << opt.table_points << ';'
     << (opt.cover_p ? hexfloat(*opt.cover_p) : std::string("none"));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(os.str()));
  return buf;
}

EffectiveModel EffectiveModel::build(Potential P, const QuadratureSpec& spec, const EffectiveOptions& opt) {
  require_planar(P);
  spec.validate();
  if (opt.table_points < 4) fail(ErrorKind::config, "mu table needs at least four points");
  if (!(opt.mu_max > 0.0)) fail(ErrorKind::config, "mu_max must be positive");
  EffectiveModel M(std::move(P), spec);
  const auto& U = M.P_.suspension();

  double mu_max = opt.mu_max;
  if (opt.cover_p) {
    const double p0 = compute_p0(M.P_, spec);
    while (phi3(U, spec, mu_max, p0).phi < *opt.cover_p) {
      mu_max *= 2.0;
      if (mu_max > 1e12) fail(ErrorKind::numerical, "cannot cover the requested momentum");
    }
  }

  const int n = opt.table_points;
  M.rows_.resize(n);
  M.rows_[0].mu = 0.0;
  M.rows_[0].phi = compute_p0(M.P_, spec);
  try {
    M.rows_[0].dphi =
        integrate_u<1>(U, spec, [](double u) { return gk::Vec<1>{1.0 / std::sqrt(2.0 * u)}; })[0];
  } catch (const DivergenceSuspected&) {
    M.rows_[0].dphi = kInf;
  }
  for (int k = 1; k < n; ++k) {
    const double mu = std::ldexp(mu_max, -(n - 1 - k));
    const auto v = phi3(U, spec, mu, M.rows_[0].phi);
    M.rows_[k] = {mu, v.phi, v.dphi};
  }
  for (int k = 1; k < n; ++k) {
    if (M.rows_[k].phi < M.rows_[k - 1].phi)
      fail(ErrorKind::numerical, "phi is not increasing along the mu table");
  }
  M.interval_error_.assign(n - 1, 0.0);
  for (int k = 0; k + 1 < n; ++k) {
    const double mid = geometric_mid(M.rows_[k].mu, M.rows_[k + 1].mu);
    M.interval_error_[k] = std::abs(M.phi_interp(mid) - M.phi_exact(mid));
  }
  M.key_ = cache_key_for(M.P_, spec, opt);
  return M;
}

EffectiveModel EffectiveModel::from_rows(Potential P, const QuadratureSpec& spec, std::vector<MuRow> rows) {
  require_planar(P);
  if (rows.size() < 4 || rows.front().mu != 0.0) fail(ErrorKind::config, "mu table must start at 0");
  EffectiveModel M(std::move(P), spec);
  M.rows_ = std::move(rows);
  M.interval_error_.assign(M.rows_.size() - 1, kInf);
  EffectiveOptions opt;
  opt.mu_max = M.rows_.back().mu;
  opt.table_points = int(M.rows_.size());
  M.key_ = cache_key_for(M.P_, spec, opt);
  return M;
}

std::string EffectiveModel::cache_key() const { return key_; }

double EffectiveModel::right_derivative_at_p0() const noexcept {
  const double d = rows_.front().dphi;
  return std::isfinite(d) ? 1.0 / d : 0.0;
}

double EffectiveModel::phi_exact(double mu) const {
  if (mu == 0.0) return compute_p0(P_, spec_);
  return phi3(P_.suspension(), spec_, mu, p0()).phi;
}

double EffectiveModel::dphi_exact(double mu) const {
  if (mu == 0.0) return rows_.front().dphi;
  return integrate_u<1>(P_.suspension(), spec_,
                        [mu](double u) { return gk::Vec<1>{1.0 / std::sqrt(2.0 * (mu + u))}; })[0];
}

double EffectiveModel::inv_cube_integral(double mu) const {
  if (!(mu > 0.0)) fail(ErrorKind::config, "the -3/2 moment needs mu > 0");
  return integrate_u<1>(P_.suspension(), spec_, [mu](double u) {
    const double w = 2.0 * (mu + u);
    return gk::Vec<1>{1.0 / (w * std::sqrt(w))};
  })[0];
}

std::size_t EffectiveModel::interval_of(double mu) const {
  auto it = std::upper_bound(rows_.begin(), rows_.end(), mu, [](double v, const MuRow& r) { return v < r.mu; });
  std::size_t k = std::size_t(it - rows_.begin());
  if (k == 0) return 0;
  return std::min(k - 1, rows_.size() - 2);
}

double EffectiveModel::phi_interp(double mu) const {
  if (mu < 0.0) fail(ErrorKind::config, "phi needs mu >= 0");
  if (mu > mu_max()) fail(ErrorKind::out_of_table, "mu exceeds the tabulated range");
  const std::size_t k = interval_of(mu);
  const auto& a = rows_[k];
  const auto& b = rows_[k + 1];
  if (mu == a.mu) return a.phi;
  if (mu == b.mu) return b.phi;
  if (k == 0) return a.phi + (b.phi - a.phi) * (mu - a.mu) / (b.mu - a.mu);
  return hermite(std::log(a.mu), std::log(b.mu), a.phi, b.phi, a.mu * a.dphi, b.mu * b.dphi, std::log(mu));
}

double EffectiveModel::interp_error(double mu) const {
  if (mu > mu_max()) return kInf;
  return interval_error_[interval_of(mu)];
}

double EffectiveModel::phi(double mu, double tol) const {
  if (mu < 0.0) fail(ErrorKind::config, "phi needs mu >= 0");
  if (mu > mu_max()) fail(ErrorKind::out_of_table, "mu exceeds the tabulated range");
  const std::size_t k = interval_of(mu);
  if (mu == rows_[k].mu) return rows_[k].phi;
  if (mu == rows_[k + 1].mu) return rows_[k + 1].phi;
  if (tol > 0.0 && interval_error_[k] <= tol) return phi_interp(mu);
  return phi_exact(mu);
}

namespace {

struct MuSolve {
  double mu;
  double dphi;
};

}  // namespace

// Interpolant bisection to relative width 1e-10, then fresh-quadrature secant/Newton
// polish inside the table bracket.
static MuSolve solve_mu(const EffectiveModel& M, double a) {
  const auto& rows = M.table();
  auto it = std::upper_bound(rows.begin(), rows.end(), a, [](double v, const MuRow& r) { return v < r.phi; });
  std::size_t k = std::size_t(it - rows.begin()) - 1;
  if (k + 1 >= rows.size()) k = rows.size() - 2;
  if (a == rows[k].phi) return {rows[k].mu, rows[k].dphi};
  double lo = rows[k].mu, hi = rows[k + 1].mu;
  for (int i = 0; i < 200 && hi - lo > 1e-10 * hi; ++i) {
    const double mid = geometric_mid(lo, hi);
    if (M.phi_interp(mid) < a)
      lo = mid;
    else
      hi = mid;
  }
  double blo = rows[k].mu, bhi = rows[k + 1].mu;
  double mu = 0.5 * (lo + hi);
  const auto& U = M.potential().suspension();
  const double tol = 1e-8 * std::max(1.0, a);
  double best_mu = mu, best_res = kInf, best_d = 0.0;
  for (int it2 = 0; it2 < 12; ++it2) {
    const auto v = phi3(U, M.quad_spec(), mu, M.p0());
    const double res = v.phi - a;
    if (std::abs(res) < best_res) {
      best_res = std::abs(res);
      best_mu = mu;
      best_d = v.dphi;
    }
    if (res < 0.0)
      blo = std::max(blo, mu);
    else
      bhi = std::min(bhi, mu);
    if (std::abs(res) <= 1e-15 * a || bhi - blo <= 4 * std::numeric_limits<double>::epsilon() * bhi) break;
    double next = mu - res / v.dphi;
    if (!(next > blo && next < bhi)) next = geometric_mid(blo, bhi);
    if (next == mu) break;
    mu = next;
  }
  if (best_res > tol) fail(ErrorKind::numerical, "effective Hamiltonian inversion did not reach its residual");
  return {best_mu, best_d};
}

double EffectiveModel::H(double p) const {
  const double a = std::abs(p);
  if (a <= p0()) return 0.0;
  if (a > p_max()) fail(ErrorKind::out_of_table, "momentum exceeds phi(mu_max)");
  return solve_mu(*this, a).mu;
}

double EffectiveModel::H_prime(double p) const {
  const double a = std::abs(p);
  const double sgn = p < 0.0 ? -1.0 : 1.0;
  if (a < p0()) return 0.0;
  if (a == p0()) return sgn * right_derivative_at_p0();
  if (a > p_max()) fail(ErrorKind::out_of_table, "momentum exceeds phi(mu_max)");
  const auto s = solve_mu(*this, a);
  return sgn / s.dphi;
}

double EffectiveModel::H_second(double p) const {
  const double a = std::abs(p);
  if (a <= p0()) fail(ErrorKind::config, "second derivative needs |p| > p0");
  if (a > p_max()) fail(ErrorKind::out_of_table, "momentum exceeds phi(mu_max)");
  const auto s = solve_mu(*this, a);
  const double hp = 1.0 / s.dphi;
  return hp * hp * hp * inv_cube_integral(s.mu);
}

double EffectiveModel::q_max() const noexcept { return 1.0 / rows_.back().dphi; }

double EffectiveModel::mu_for_slope(double q, bool exact) const {
  const double target = 1.0 / q;  // dphi(mu) = 1/q, dphi decreasing in mu
  if (target < rows_.back().dphi) fail(ErrorKind::out_of_table, "slope exceeds the tabulated gradient range");
  std::size_t k = 0;
  while (k + 2 < rows_.size() && rows_[k + 1].dphi > target) ++k;
  const auto& a = rows_[k];
  const auto& b = rows_[k + 1];
  if (target == b.dphi) return b.mu;
  double guess;
  if (k == 0 || !std::isfinite(a.dphi)) {
    // dphi ~ mu^(-c) near 0 when divergent; linear in mu when finite.
    if (std::isfinite(a.dphi))
      guess = b.mu * (a.dphi - target) / (a.dphi - b.dphi);
    else
      guess = b.mu * std::pow(b.dphi / target, 2.0);
  } else {
    const double t = std::log(a.dphi / target) / std::log(a.dphi / b.dphi);
    guess = std::exp(std::log(a.mu) + t * (std::log(b.mu) - std::log(a.mu)));
  }
  guess = std::clamp(guess, a.mu, b.mu);
  if (!exact) return guess;
  double lo = a.mu, hi = b.mu;
  double mu = guess > 0.0 ? guess : 0.5 * hi;
  const auto& U = P_.suspension();
  for (int it = 0; it < 60; ++it) {
    auto v = integrate_u<2>(U, spec_, [mu](double u) {
      const double w = 2.0 * (mu + u);
      const double s = std::sqrt(w);
      return gk::Vec<2>{1.0 / s, 1.0 / (w * s)};
    });
    const double g = v[0] - target;
    if (std::abs(g) <= 1e-13 * target) return mu;
    if (g > 0.0)
      lo = mu;
    else
      hi = mu;
    double next = mu + g / v[1];
    if (!(next > lo && next < hi)) next = geometric_mid(lo, hi);
    if (next == mu || hi - lo <= 1e-15 * hi) return mu;
    mu = next;
  }
  return mu;
}

double EffectiveModel::L(double q, bool exact) const {
  const double a = std::abs(q);
  if (a == 0.0) return 0.0;
  const double q0 = right_derivative_at_p0();
  if (a <= q0) return p0() * a;
  const double mu = mu_for_slope(a, exact);
  const double ph = exact ? phi_exact(mu) : phi_interp(mu);
  return ph * a - mu;
}

double phi(const EffectiveModel& M, double mu) { return M.phi(mu); }
double effective_H(const EffectiveModel& M, double p) { return M.H(p); }
double effective_H_prime(const EffectiveModel& M, double p) { return M.H_prime(p); }
double effective_H_second(const EffectiveModel& M, double p) { return M.H_second(p); }
double effective_L(const EffectiveModel& M, double q) { return M.L(q); }

namespace {

double corrector_mu(const EffectiveModel& M, double p) {
  const double a = std::abs(p);
  if (a < M.p0() * (1.0 - 1e-14)) fail(ErrorKind::config, "correctors need |p| >= p0");
  return a <= M.p0() ? 0.0 : M.H(p);
}

}  // namespace

double corrector_value(const EffectiveModel& M, double p, double x) {
  return corrector_values(M, p, std::vector<double>{x}).front();
}

std::vector<double> corrector_values(const EffectiveModel& M, double p, const std::vector<double>& xs) {
  const double mu = corrector_mu(M, p);
  const double a = std::abs(p);
  const auto& P = M.potential();
  auto k = [&P, mu, a](double b, double t) { return gk::Vec<1>{std::sqrt(2.0 * (mu + P.U_along(b, t))) - a}; };
  const double h = orbit_panel_length(P.frequency());
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const double w = detail::along<1>(k, 0.0, x, h, M.quad_spec()).value[0];
    out.push_back(p < 0.0 ? -w : w);
  }
  return out;
}

CorrectorGrowth corrector_growth(const EffectiveModel& M, double p, const std::vector<double>& t_grid) {
  if (t_grid.size() < 4) fail(ErrorKind::config, "corrector growth needs at least four times");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
      fail(ErrorKind::config, "time grid must be positive and increasing");
  }
  const double mu = corrector_mu(M, p);
  const double a = std::abs(p);
  const auto& P = M.potential();
  const auto& spec = M.quad_spec();
  const double h = orbit_panel_length(P.frequency());
  auto k = [&P, mu, a](double b, double t) { return gk::Vec<1>{std::sqrt(2.0 * (mu + P.U_along(b, t))) - a}; };

  CorrectorGrowth out;
  double w = 0.0, env = 0.0, x = 0.0;
  for (double t : t_grid) {
    while (x < t) {
      const double nx = std::min(t, x + h);
      auto local = [&k, x](double t) { return k(x, t); };
      w += gk::adaptive<1>(local, 0.0, nx - x, spec.abs_tol * (nx - x), spec.rel_tol, spec.max_subdivisions)
               .value[0];
      env = std::max(env, std::abs(w));
      x = nx;
    }
    out.t.push_back(t);
    out.v.push_back(p < 0.0 ? -w : w);
    out.envelope.push_back(env);
  }
  bool flat = true;
  std::vector<double> ratio;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    if (out.envelope[i] > 1e-10 * out.t[i]) flat = false;
    ratio.push_back(out.envelope[i] / out.t[i]);
  }
  if (flat) fail(ErrorKind::flat_fit, "corrector vanishes along the time grid");
  out.fit = fit_power_law(out.t, ratio);
  return out;
}

RateFit corrector_growth_fit(const EffectiveModel& M, double p, const std::vector<double>& t_grid) {
  return corrector_growth(M, p, t_grid).fit;
}

double predicted_holder_beta(double gamma) {
  if (gamma > 2.0) return 0.5 - 1.0 / gamma;
  if (gamma == 2.0) return 0.0;
  if (gamma > 2.0 / 3.0) return 1.0 / gamma - 0.5;
  return 1.0;
}

RegularityReport regularity_report(const EffectiveModel& M, double gamma) {
  if (M.potential().suspension().kind() == SuspensionKind::trig_polynomial)
    fail(ErrorKind::config, "regularity report needs a prototype potential");
  RegularityReport rep;
  rep.gamma = gamma;
  rep.predicted_holder_beta = predicted_holder_beta(gamma);
  rep.log_flag = gamma == 2.0;
  rep.measured_prime_at_p0 = M.right_derivative_at_p0();
  std::vector<double> Hs, Hp;
  for (int k = 0; k < 10; ++k) {
    const double p = M.p0() + 0.5 * std::ldexp(1.0, -k);
    if (p > M.p_max()) continue;
    const double h = M.H(p);
    if (!(h > 0.0)) continue;
    Hs.push_back(h);
    Hp.push_back(M.H_prime(p));
  }
  rep.asymptotic_fit = rep.log_flag ? fit_reciprocal_log_law(Hs, Hp) : fit_power_law(Hs, Hp);
  return rep;
}

void EffectiveModel::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::config, "cannot write effective table: " + path);
  os << "# hjqp effective table v1\n# key=" << key_ << "\nmu,phi,dphi,interp_error\n";
  char buf[160];
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const double e = k + 1 < rows_.size() ? interval_error_[k] : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", rows_[k].mu, rows_[k].phi, rows_[k].dphi, e);
    os << buf;
  }
}

std::optional<EffectiveModel> EffectiveModel::load_csv(const std::string& path, const Potential& P,
                                                       const QuadratureSpec& spec, const EffectiveOptions& opt) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  std::string line;
  if (!std::getline(is, line) || line != "# hjqp effective table v1") return std::nullopt;
  if (!std::getline(is, line)) return std::nullopt;
  const std::string key = cache_key_for(P, spec, opt);
  if (line != "# key=" + key) return std::nullopt;
  if (!std::getline(is, line)) return std::nullopt;
  std::vector<MuRow> rows;
  std::vector<double> errs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double v[4];
    const char* c = line.c_str();
    char* end = nullptr;
    for (int i = 0; i < 4; ++i) {
      v[i] = std::strtod(c, &end);
      if (end == c) return std::nullopt;
      c = (*end == ',') ? end + 1 : end;
    }
    rows.push_back({v[0], v[1], v[2]});
    errs.push_back(v[3]);
  }
  if (rows.size() < 4) return std::nullopt;
  EffectiveModel M(P, spec);
  M.rows_ = std::move(rows);
  errs.pop_back();
  M.interval_error_ = std::move(errs);
  M.key_ = key;
  return M;
}

}  // namespace hjqp
