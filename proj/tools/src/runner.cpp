#include "hjqp/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "hjqp/cli/report.hpp"
#include "hjqp/dynamics.hpp"
#include "hjqp/ergodic.hpp"
#include "hjqp/homog.hpp"

namespace hjqp::cli {

namespace {

std::string fmt(double v) { return format_number(v); }

std::string fit_text(const RateFit& f) {
  return "model=" + to_string(f.model) + " exponent=" + fmt(f.exponent) + " log_constant=" + fmt(f.log_constant) +
         " r_squared=" + fmt(f.r_squared) + " samples=" + std::to_string(f.sample_count);
}

struct Context {
  const ExperimentConfig& config;
  std::string out;
  RunOutcome outcome;
  PlotSpec plot;
  std::string csv;

  void add(const std::string& key, const std::string& value) { outcome.summary.push_back(key + " = " + value); }
  void set_fit(const RateFit& f, const std::string& key = "fit") {
    if (!outcome.fit) outcome.fit = f;
    add(key, fit_text(f));
  }
};

std::string cache_directory(const ExperimentConfig& c) {
  return c.cache_dir.empty() ? (std::filesystem::path(c.out_dir) / "cache").string() : c.cache_dir;
}

void run_effective(Context& ctx) {
  const auto M = effective_model(ctx.config);
  CsvTable table({"mu", "phi", "dphi", "interp_error"});
  for (const auto& r : M.table()) table.add({fmt(r.mu), fmt(r.phi), fmt(r.dphi), fmt(M.interp_error(r.mu))});
  const std::string table_path = (std::filesystem::path(ctx.out) / "effective_table.csv").string();
  write_file(table_path, table.str());
  ctx.outcome.files.push_back(table_path);

  CsvTable h({"p", "H", "H_prime", "H_second"});
  Series s{"H", {}, {}, true};
  const int n = ctx.config.effective_p_points;
  for (int k = 0; k < n; ++k) {
    const double p = M.p0() + ctx.config.effective_p_span * double(k) / double(std::max(1, n - 1));
    if (p > M.p_max()) fail(ErrorKind::out_of_table, "p exceeds the table; raise mu_max or set cover_p");
    const double H = M.H(p);
    double H2 = std::numeric_limits<double>::quiet_NaN();
    if (p > M.p0()) H2 = M.H_second(p);
    h.add({fmt(p), fmt(H), fmt(M.H_prime(p)), fmt(H2)});
    s.x.push_back(p);
    s.y.push_back(H);
  }
  ctx.csv = h.str();
  ctx.add("p0", fmt(M.p0()));
  ctx.add("mu_max", fmt(M.mu_max()));
  ctx.add("right_derivative_at_p0", fmt(M.right_derivative_at_p0()));
  ctx.add("cache_key", M.cache_key());
  const auto& U = M.potential().suspension();
  if (U.kind() != SuspensionKind::trig_polynomial) {
    const auto rep = regularity_report(M, U.gamma());
    ctx.add("predicted_holder_beta", fmt(rep.predicted_holder_beta));
    ctx.add("log_flag", rep.log_flag ? "true" : "false");
    ctx.set_fit(rep.asymptotic_fit, "derivative_fit");
  }
  ctx.plot = {"effective Hamiltonian", "p", "H(p)", false, false, {s}};
}

void run_corrector(Context& ctx) {
  const auto M = effective_model(ctx.config);
  CsvTable t({"p", "t", "v", "envelope"});
  for (double off : ctx.config.p_offsets) {
    const double p = M.p0() + off;
    const auto g = corrector_growth(M, p, ctx.config.t_grid);
    Series s{"p0+" + fmt(off), {}, {}, false};
    for (std::size_t i = 0; i < g.t.size(); ++i) {
      t.add({fmt(p), fmt(g.t[i]), fmt(g.v[i]), fmt(g.envelope[i])});
      s.x.push_back(g.t[i]);
      s.y.push_back(g.envelope[i] / g.t[i]);
    }
    ctx.plot.series.push_back(s);
    ctx.set_fit(g.fit, "fit[p0+" + fmt(off) + "]");
  }
  ctx.csv = t.str();
  ctx.add("p0", fmt(M.p0()));
  ctx.plot.title = "corrector growth";
  ctx.plot.x_label = "t";
  ctx.plot.y_label = "max |v_p| / t";
}

void ergodic_output(Context& ctx, const ErgodicReport& r, const std::string& title, bool log_y) {
  CsvTable t({"T", "value", "error"});
  Series s{r.tag, {}, {}, false};
  for (std::size_t i = 0; i < r.T.size(); ++i) {
    t.add({fmt(r.T[i]), fmt(r.value[i]), fmt(r.error[i])});
    s.x.push_back(r.T[i]);
    s.y.push_back(r.error[i]);
  }
  ctx.csv = t.str();
  ctx.add("observable", r.tag);
  ctx.add("mean_value", r.mean_value ? fmt(*r.mean_value) : "divergent");
  ctx.add("saturated", r.saturated ? "true" : "false");
  ctx.add("target_exponent", fmt(r.target_exponent));
  ctx.set_fit(r.fit);
  ctx.plot = {title, "T", "error", true, log_y, {s, fit_series(r.fit, r.T.front(), r.T.back(), "fit")}};
}

void run_birkhoff(Context& ctx) {
  const auto P = make_potential(ctx.config);
  const auto F = make_observable(ctx.config, P);
  const auto r = birkhoff_rate_experiment(F, P.frequency(), ctx.config.T_grid, ctx.config.quad, ctx.config.mean);
  ergodic_output(ctx, r, "Birkhoff average error", true);
}

void run_unbounded(Context& ctx) {
  const auto P = make_potential(ctx.config);
  const auto r = unbounded_mean_experiment(P, ctx.config.T_grid, ctx.config.quad, ctx.config.start);
  ergodic_output(ctx, r, "average of U^(-1/2)", r.fit.model == FitModel::power_law);
}

void run_inclusion(Context& ctx) {
  const auto P = make_potential(ctx.config);
  const auto F = make_observable(ctx.config, P);
  const auto r = inclusion_length_estimate(F, P.frequency(), ctx.config.eps_grid, ctx.config.inclusion_stride,
                                           ctx.config.inclusion_max_window);
  CsvTable t({"eps", "inverse_eps", "length"});
  Series s{"length", {}, {}, false};
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    t.add({fmt(r.eps[i]), fmt(1.0 / r.eps[i]), fmt(r.length[i])});
    s.x.push_back(1.0 / r.eps[i]);
    s.y.push_back(r.length[i]);
  }
  ctx.csv = t.str();
  ctx.add("observable", F.tag);
  ctx.set_fit(r.fit);
  ctx.plot = {"inclusion length", "1/eps", "length", true, true,
              {s, fit_series(r.fit, s.x.front(), s.x.back(), "fit")}};
}

void run_characteristics(Context& ctx) {
  const auto M = effective_model(ctx.config);
  CsvTable t({"p", "r", "t", "eta", "error", "limit"});
  for (double off : ctx.config.p_offsets) {
    const double p = M.p0() + off;
    const auto v = velocity_average(M, p, ctx.config.t_grid);
    Series s{"p0+" + fmt(off), {}, {}, false};
    for (std::size_t i = 0; i < v.t.size(); ++i) {
      t.add({fmt(p), fmt(v.r), fmt(v.t[i]), fmt(v.eta[i]), fmt(v.error[i]), fmt(v.limit)});
      s.x.push_back(v.t[i]);
      s.y.push_back(v.error[i]);
    }
    ctx.plot.series.push_back(s);
    const std::string tag = "[p0+" + fmt(off) + "]";
    ctx.add("target" + tag, fmt(v.target));
    if (v.flat)
      ctx.add("fit" + tag, "flat");
    else
      ctx.set_fit(v.fit, "fit" + tag);
  }
  ctx.csv = t.str();
  ctx.add("p0", fmt(M.p0()));
  ctx.plot.title = "characteristic velocity averages";
  ctx.plot.x_label = "t";
  ctx.plot.y_label = "|eta(t)/t - H'(p)|";
}

void run_homogenize(Context& ctx) {
  const auto& c = ctx.config;
  const auto P = make_potential(c);
  const auto u0 = make_initial(c);
  const auto M = effective_model(c);
  UepsOptions opt;
  opt.r_grid_points = c.r_points;
  std::optional<FdSolution> fd;
  if (c.fd_dx > 0.0) {
    FdOptions fo;
    fo.dx = c.fd_dx;
    fo.cfl = c.fd_cfl;
    fd = fd_viscosity_solve(P, u0, c.epsilon, c.time, fo, c.points);
  }
  CsvTable t({"epsilon", "x", "t", "u_eps", "u_hom", "error", "r_star", "branch", "u_fd"});
  double worst = 0.0, worst_fd = 0.0;
  for (double x : c.points) {
    const auto r = u_eps(P, u0, x, c.time, c.epsilon, c.quad, opt);
    const double h = u_hom(M, u0, x, c.time);
    const double e = std::abs(r.u_eps - h);
    worst = std::max(worst, e);
    std::string fdv;
    if (fd) {
      fdv = fmt(fd->at(x));
      worst_fd = std::max(worst_fd, std::abs(r.u_eps - fd->at(x)));
    }
    t.add({fmt(c.epsilon), fmt(x), fmt(c.time), fmt(r.u_eps), fmt(h), fmt(e), fmt(r.r_star), to_string(r.branch), fdv});
  }
  ctx.csv = t.str();
  ctx.outcome.max_error = worst;
  ctx.add("max_error", fmt(worst));
  if (fd) {
    ctx.add("max_fd_gap", fmt(worst_fd));
    ctx.add("fd_steps", std::to_string(fd->steps));
  }
  ctx.add("energy_cutoff", fmt(energy_cutoff(u0, P)));
}

void run_sweep(Context& ctx) {
  const auto& c = ctx.config;
  SweepConfig sc{make_potential(c)};
  sc.u0 = make_initial(c);
  sc.epsilons = c.eps_grid;
  sc.points = c.points;
  sc.t = c.time;
  sc.quad = c.quad;
  sc.effective = c.effective;
  sc.search.r_grid_points = c.r_points;
  const auto M = effective_model(c);
  const auto r = rate_sweep(sc, M);
  CsvTable t({"epsilon", "point", "u_eps", "u_hom", "error", "r_star", "branch"});
  for (const auto& row : r.rows)
    t.add({fmt(row.epsilon), fmt(row.x), fmt(row.u_eps), fmt(row.u_hom), fmt(row.error), fmt(row.r_star),
           to_string(row.branch)});
  ctx.csv = t.str();
  CsvTable rates({"epsilon", "error"});
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) rates.add({fmt(r.epsilons[i]), fmt(r.errors[i])});
  const std::string rates_path = (std::filesystem::path(ctx.out) / "sweep_rates.csv").string();
  write_file(rates_path, rates.str());
  ctx.outcome.files.push_back(rates_path);
  ctx.outcome.max_error = *std::max_element(r.errors.begin(), r.errors.end());
  ctx.add("regime", r.regime);
  ctx.add("predicted_upper_exponent", fmt(r.predicted_upper));
  ctx.add("predicted_lower_exponent", fmt(r.predicted_lower));
  ctx.add("nonincreasing", r.nonincreasing ? "true" : "false");
  if (r.fit.sample_count > 0) {
    ctx.set_fit(r.fit);
  } else {
    ctx.add("fit", "flat");
  }
  Series s{"e(eps)", r.epsilons, r.errors, false};
  ctx.plot = {"homogenization error", "eps", "e(eps)", true, r.fit.model == FitModel::power_law, {s}};
  if (r.fit.sample_count > 0) ctx.plot.series.push_back(fit_series(r.fit, r.epsilons.back(), r.epsilons.front(), "fit"));
}

void check_assertions(Context& ctx, bool nonincreasing_known, bool nonincreasing) {
  const auto& a = ctx.config.assertions;
  auto& o = ctx.outcome;
  auto miss = [&](const std::string& m) { o.assertion_failures.push_back(m); };
  const bool needs_fit = !std::isnan(a.exponent_min) || !std::isnan(a.exponent_max) || !std::isnan(a.r_squared_min);
  if (needs_fit && !o.fit) miss("no fit available");
  if (o.fit) {
    if (!std::isnan(a.exponent_min) && !(o.fit->exponent >= a.exponent_min))
      miss("exponent " + fmt(o.fit->exponent) + " < " + fmt(a.exponent_min));
    if (!std::isnan(a.exponent_max) && !(o.fit->exponent <= a.exponent_max))
      miss("exponent " + fmt(o.fit->exponent) + " > " + fmt(a.exponent_max));
    if (!std::isnan(a.r_squared_min) && !(o.fit->r_squared >= a.r_squared_min))
      miss("r_squared " + fmt(o.fit->r_squared) + " < " + fmt(a.r_squared_min));
  }
  if (!std::isnan(a.max_error)) {
    if (!o.max_error)
      miss("no error measure available");
    else if (!(*o.max_error <= a.max_error))
      miss("max error " + fmt(*o.max_error) + " > " + fmt(a.max_error));
  }
  if (a.nonincreasing && (!nonincreasing_known || !nonincreasing)) miss("errors are not nonincreasing");
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_suspension:
    case ErrorKind::resonant_frequency:
    case ErrorKind::cfl_violation:
    case ErrorKind::hypothesis_failed: return exit_config;
    default: return exit_numerical;
  }
}

EffectiveModel effective_model(const ExperimentConfig& c) {
  const auto P = make_potential(c);
  if (!c.cache) return EffectiveModel::build(P, c.quad, c.effective);
  const std::string dir = cache_directory(c);
  ensure_directory(dir);
  const std::string key = EffectiveModel::cache_key_for(P, c.quad, c.effective);
  const std::string path = (std::filesystem::path(dir) / ("effective-" + key + ".csv")).string();
  if (auto m = EffectiveModel::load_csv(path, P, c.quad, c.effective)) return *m;
  auto m = EffectiveModel::build(P, c.quad, c.effective);
  m.save_csv(path);
  return m;
}

RunOutcome run(const ExperimentConfig& config_in, const RunOptions& options) {
  ExperimentConfig config = config_in;
  if (options.out_dir) config.out_dir = *options.out_dir;
  validate_config(config);
  if (config.kind == ExperimentKind::effective && !config.effective.cover_p)
    config.effective.cover_p = compute_p0(make_potential(config), config.quad) + config.effective_p_span;
  ensure_directory(config.out_dir);
  Context ctx{config, config.out_dir, {}, {}, {}};
  switch (config.kind) {
    case ExperimentKind::effective: run_effective(ctx); break;
    case ExperimentKind::corrector: run_corrector(ctx); break;
    case ExperimentKind::birkhoff: run_birkhoff(ctx); break;
    case ExperimentKind::unbounded_mean: run_unbounded(ctx); break;
    case ExperimentKind::inclusion: run_inclusion(ctx); break;
    case ExperimentKind::characteristics: run_characteristics(ctx); break;
    case ExperimentKind::homogenize: run_homogenize(ctx); break;
    case ExperimentKind::sweep: run_sweep(ctx); break;
  }
  const auto base = std::filesystem::path(ctx.out);
  const std::string name = to_string(config.kind);
  const std::string csv_path = (base / (name + ".csv")).string();
  write_file(csv_path, ctx.csv);
  ctx.outcome.files.insert(ctx.outcome.files.begin(), csv_path);
  if (options.plot && !ctx.plot.series.empty()) {
    const std::string svg_path = (base / (name + ".svg")).string();
    write_file(svg_path, render_svg(ctx.plot));
    ctx.outcome.files.push_back(svg_path);
  }

  bool nonincreasing_known = false, nonincreasing = false;
  for (const auto& line : ctx.outcome.summary) {
    if (line.rfind("nonincreasing = ", 0) == 0) {
      nonincreasing_known = true;
      nonincreasing = line == "nonincreasing = true";
    }
  }
  if (options.assert_mode) check_assertions(ctx, nonincreasing_known, nonincreasing);

  std::ostringstream m;
  m << "# hjqp run manifest; parse it with --config to repeat the run\n[run]\nexperiment = " << name
    << "\nassert = " << (options.assert_mode ? "true" : "false") << "\n";
  for (const auto& f : ctx.outcome.files) m << "file = " << std::filesystem::path(f).filename().string() << "\n";
  m << "\n" << to_text(config) << "\n[result]\n";
  for (const auto& line : ctx.outcome.summary) m << line << "\n";
  for (const auto& f : ctx.outcome.assertion_failures) m << "assertion_failed = " << f << "\n";
  const std::string manifest = (base / "manifest.cfg").string();
  write_file(manifest, m.str());
  ctx.outcome.files.push_back(manifest);
  if (!ctx.outcome.assertion_failures.empty()) ctx.outcome.exit_code = exit_assertion;
  return ctx.outcome;
}

RunOutcome run_guarded(const ExperimentConfig& config, const RunOptions& options, std::string* message) {
  try {
    return run(config, options);
  } catch (const Error& e) {
    if (message) *message = e.what();
    RunOutcome o;
    o.exit_code = exit_code_for(e.kind());
    return o;
  } catch (const std::exception& e) {
    if (message) *message = e.what();
    RunOutcome o;
    o.exit_code = exit_numerical;
    return o;
  }
}

HypothesisReport validate(const ExperimentConfig& c) {
  validate_config(c);
  const auto P = make_potential(c);
  const auto& U = P.suspension();
  const std::size_t n = P.frequency().dim();
  HypothesisReport r;
  auto line = [&](const std::string& s) { r.lines.push_back(s); };

  const auto d = estimate_diophantine(c.potential.xi, std::max(100, c.potential.resonance_cutoff));
  r.sigma = d.sigma;
  r.diophantine_C = d.C;
  r.sigma_above_grid = d.above_grid;
  line("diophantine: sigma = " + fmt(d.sigma) + ", C = " + fmt(d.C) + ", K = " + std::to_string(d.K) +
       (d.above_grid ? " (no admissible sigma on the grid)" : ""));

  r.sobolev_s = 0.5 * double(n) + d.sigma + 0.05;
  if (n == 2) {
    const double a = sobolev_norm(U, r.sobolev_s, 64), b = sobolev_norm(U, r.sobolev_s, 128);
    r.sobolev_converged = std::abs(b - a) <= 0.01 * b;
    line("sqrt(U) in H^" + fmt(r.sobolev_s) + ": norm " + fmt(a) + " (N=64), " + fmt(b) + " (N=128) -> " +
         (r.sobolev_converged ? "bounded" : "growing"));
  } else {
    line("Sobolev check skipped (n != 2)");
  }
  const auto obs = sqrt_u_observable(U);
  r.holder_alpha = std::isfinite(obs.lipschitz) ? 1.0 : obs.holder_exponent;
  line("sqrt(U) Hoelder exponent alpha = " + fmt(r.holder_alpha));

  r.p1 = !d.above_grid && r.sobolev_converged;
  r.p4 = n == 2 && std::abs(d.sigma - 1.0) <= 0.05 + 1e-12 && r.holder_alpha > 0.0;
  line(std::string("(P1) ") + (r.p1 ? "satisfied" : "not satisfied"));
  line("(P2) not testable numerically (full-measure frequency set)");
  line("(P3) not testable numerically (algebraic components)");
  line(std::string("(P4) ") + (r.p4 ? "satisfied" : "not satisfied"));

  if (U.kind() != SuspensionKind::trig_polynomial) {
    const double g = U.gamma();
    r.lower_exponent = predicted_lower_exponent(g);
    r.upper_exponent = predicted_upper_exponent(g);
    r.upper_logarithmic = g == 2.0;
    r.row = g > 2.0 ? "prototype gamma > 2" : g == 2.0 ? "prototype gamma = 2" : g >= 1.0 ? "prototype 1 <= gamma < 2"
                                                                                           : "prototype gamma < 1";
    if (g > 2.0 && d.sigma > 1.0 && d.sigma < 2.0) line("upper bound holds for sigma in (1, 2)");
  } else if (r.p1) {
    r.row = "(P1)";
    r.lower_exponent = 1.0;
  } else if (r.p4) {
    r.row = "(P4)";
    r.lower_exponent = r.holder_alpha / (r.holder_alpha + 1.0);
  } else {
    r.row = "none";
    r.lower_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  line("row: " + r.row);
  line("predicted lower rate: eps^" + fmt(r.lower_exponent));
  if (r.upper_logarithmic)
    line("predicted upper rate: 1/|log eps|");
  else if (!std::isnan(r.upper_exponent))
    line("predicted upper rate: eps^" + fmt(r.upper_exponent));
  else
    line("predicted upper rate: none");
  return r;
}

}  // namespace hjqp::cli
