#include "hjqp/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hjqp/dynamics.hpp"
#include "hjqp/errors.hpp"

namespace hjqp::cli {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kKinds{
    {ExperimentKind::effective, "effective"},
    {ExperimentKind::corrector, "corrector"},
    {ExperimentKind::birkhoff, "birkhoff"},
    {ExperimentKind::unbounded_mean, "unbounded-mean"},
    {ExperimentKind::inclusion, "inclusion"},
    {ExperimentKind::characteristics, "characteristics"},
    {ExperimentKind::homogenize, "homogenize"},
    {ExperimentKind::sweep, "sweep"},
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.rfind("sqrt(", 0) == 0 && s.back() == ')') return std::sqrt(parse_number(s.substr(5, s.size() - 6)));
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end) fail(ErrorKind::config, "not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  const double v = parse_number(s);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(ErrorKind::config, "not an integer: '" + trim(s) + "'");
  return int(v);
}

bool parse_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  fail(ErrorKind::config, "not a boolean: '" + t + "'");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ','))
    if (!item.empty()) out.push_back(parse_number(item));
  return out;
}

// "geometric(lo, hi, n)" or a comma separated list; lo > hi gives a decreasing grid.
std::vector<double> parse_grid(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.rfind("geometric(", 0) == 0 && s.back() == ')') {
    const auto args = split(s.substr(10, s.size() - 11), ',');
    if (args.size() != 3) fail(ErrorKind::config, "geometric() takes lo, hi, n");
    const double a = parse_number(args[0]), b = parse_number(args[1]);
    const int n = parse_int(args[2]);
    if (a > b) {
      auto g = geometric_grid(b, a, n);
      return {g.rbegin(), g.rend()};
    }
    return geometric_grid(a, b, n);
  }
  return parse_list(s);
}

std::optional<double> parse_optional(const std::string& s) {
  const std::string t = trim(s);
  if (t == "none" || t == "default" || t.empty()) return std::nullopt;
  return parse_number(t);
}

// "k1 k2 re im; ..." with dim integer entries per mode.
std::vector<FourierMode> parse_modes(const std::string& s, std::size_t dim) {
  std::vector<FourierMode> out;
  for (const auto& item : split(s, ';')) {
    if (item.empty()) continue;
    std::istringstream in(item);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.size() != dim + 2) fail(ErrorKind::config, "mode '" + item + "' needs " + std::to_string(dim) + " integers and re im");
    FourierMode m;
    for (std::size_t i = 0; i < dim; ++i) m.k.push_back(parse_int(tok[i]));
    m.c = {parse_number(tok[dim]), parse_number(tok[dim + 1])};
    out.push_back(m);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s;
}

std::string join_int(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}

std::string optional_text(const std::optional<double>& v) { return v ? format_number(*v) : "none"; }

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"experiment",
       {{"kind",
         [](ExperimentConfig& c, const std::string& v) {
           const auto k = parse_kind(trim(v));
           if (!k) fail(ErrorKind::config, "unknown experiment kind '" + trim(v) + "'");
           c.kind = *k;
         }}}},
      {"potential",
       {{"kind", [](ExperimentConfig& c, const std::string& v) { c.potential.kind = trim(v); }},
        {"gamma", [](ExperimentConfig& c, const std::string& v) { c.potential.gamma = parse_number(v); }},
        {"xi", [](ExperimentConfig& c, const std::string& v) { c.potential.xi = parse_list(v); }},
        {"modes",
         [](ExperimentConfig& c, const std::string& v) { c.potential.modes = parse_modes(v, c.potential.xi.size()); }},
        {"value", [](ExperimentConfig& c, const std::string& v) { c.potential.value = parse_number(v); }},
        {"resonance_cutoff",
         [](ExperimentConfig& c, const std::string& v) { c.potential.resonance_cutoff = parse_int(v); }}}},
      {"quadrature",
       {{"abs_tol", [](ExperimentConfig& c, const std::string& v) { c.quad.abs_tol = parse_number(v); }},
        {"rel_tol", [](ExperimentConfig& c, const std::string& v) { c.quad.rel_tol = parse_number(v); }},
        {"max_subdivisions", [](ExperimentConfig& c, const std::string& v) { c.quad.max_subdivisions = parse_int(v); }},
        {"polar_refinement_radius",
         [](ExperimentConfig& c, const std::string& v) { c.quad.polar_refinement_radius = parse_number(v); }}}},
      {"effective",
       {{"mu_max", [](ExperimentConfig& c, const std::string& v) { c.effective.mu_max = parse_number(v); }},
        {"table_points", [](ExperimentConfig& c, const std::string& v) { c.effective.table_points = parse_int(v); }},
        {"cover_p", [](ExperimentConfig& c, const std::string& v) { c.effective.cover_p = parse_optional(v); }},
        {"p_points", [](ExperimentConfig& c, const std::string& v) { c.effective_p_points = parse_int(v); }},
        {"p_span", [](ExperimentConfig& c, const std::string& v) { c.effective_p_span = parse_number(v); }}}},
      {"grids",
       {{"T", [](ExperimentConfig& c, const std::string& v) { c.T_grid = parse_grid(v); }},
        {"t", [](ExperimentConfig& c, const std::string& v) { c.t_grid = parse_grid(v); }},
        {"eps", [](ExperimentConfig& c, const std::string& v) { c.eps_grid = parse_grid(v); }},
        {"r_points", [](ExperimentConfig& c, const std::string& v) { c.r_points = parse_int(v); }},
        {"p_offsets", [](ExperimentConfig& c, const std::string& v) { c.p_offsets = parse_list(v); }}}},
      {"observable",
       {{"kind", [](ExperimentConfig& c, const std::string& v) { c.observable.kind = trim(v); }},
        {"k",
         [](ExperimentConfig& c, const std::string& v) {
           c.observable.k.clear();
           for (const auto& t : split(v, ',')) c.observable.k.push_back(parse_int(t));
         }},
        {"phase", [](ExperimentConfig& c, const std::string& v) { c.observable.phase = parse_int(v); }},
        {"scale", [](ExperimentConfig& c, const std::string& v) { c.observable.scale = parse_number(v); }},
        {"value", [](ExperimentConfig& c, const std::string& v) { c.observable.value = parse_number(v); }},
        {"mean", [](ExperimentConfig& c, const std::string& v) { c.mean = parse_optional(v); }}}},
      {"unbounded", {{"start", [](ExperimentConfig& c, const std::string& v) { c.start = parse_optional(v); }}}},
      {"inclusion",
       {{"stride", [](ExperimentConfig& c, const std::string& v) { c.inclusion_stride = parse_number(v); }},
        {"max_window", [](ExperimentConfig& c, const std::string& v) { c.inclusion_max_window = parse_number(v); }}}},
      {"initial",
       {{"kind", [](ExperimentConfig& c, const std::string& v) { c.u0.kind = trim(v); }},
        {"slope", [](ExperimentConfig& c, const std::string& v) { c.u0.slope = parse_number(v); }},
        {"width", [](ExperimentConfig& c, const std::string& v) { c.u0.width = parse_number(v); }},
        {"center", [](ExperimentConfig& c, const std::string& v) { c.u0.center = parse_number(v); }},
        {"height", [](ExperimentConfig& c, const std::string& v) { c.u0.height = parse_number(v); }},
        {"offset", [](ExperimentConfig& c, const std::string& v) { c.u0.offset = parse_number(v); }}}},
      {"homogenize",
       {{"points", [](ExperimentConfig& c, const std::string& v) { c.points = parse_list(v); }},
        {"time", [](ExperimentConfig& c, const std::string& v) { c.time = parse_number(v); }},
        {"epsilon", [](ExperimentConfig& c, const std::string& v) { c.epsilon = parse_number(v); }},
        {"fd_dx", [](ExperimentConfig& c, const std::string& v) { c.fd_dx = parse_number(v); }},
        {"fd_cfl", [](ExperimentConfig& c, const std::string& v) { c.fd_cfl = parse_number(v); }}}},
      {"output",
       {{"dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = trim(v); }},
        {"cache", [](ExperimentConfig& c, const std::string& v) { c.cache = parse_bool(v); }},
        {"cache_dir", [](ExperimentConfig& c, const std::string& v) { c.cache_dir = trim(v); }}}},
      {"assert",
       {{"exponent_min",
         [](ExperimentConfig& c, const std::string& v) { c.assertions.exponent_min = parse_optional(v).value_or(NAN); }},
        {"exponent_max",
         [](ExperimentConfig& c, const std::string& v) { c.assertions.exponent_max = parse_optional(v).value_or(NAN); }},
        {"r_squared_min",
         [](ExperimentConfig& c, const std::string& v) { c.assertions.r_squared_min = parse_optional(v).value_or(NAN); }},
        {"max_error",
         [](ExperimentConfig& c, const std::string& v) { c.assertions.max_error = parse_optional(v).value_or(NAN); }},
        {"nonincreasing",
         [](ExperimentConfig& c, const std::string& v) { c.assertions.nonincreasing = parse_bool(v); }}}},
  };
  return table;
}

bool is_geometric(const std::vector<double>& g) {
  if (g.size() < 4) return false;
  for (double v : g)
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  const double q = std::log(g[1] / g[0]);
  if (q == 0.0) return false;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (std::abs(std::log(g[i] / g[i - 1]) - q) > 1e-6 * std::abs(q)) return false;
  return true;
}

std::string optional_nan(double v) { return std::isnan(v) ? "none" : format_number(v); }

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "?";
}

std::optional<ExperimentKind> parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds)
    if (name == s) return kind;
  return std::nullopt;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [kind, name] : kKinds) v.push_back(name);
    return v;
  }();
  return names;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.T_grid = default_T_grid();
  c.t_grid = default_t_grid();
  if (kind == ExperimentKind::inclusion) {
    c.eps_grid = {0.2, 0.1, 0.05, 0.025, 0.0125};
    c.observable.kind = "sum-of-sines";
  } else {
    for (int k = 3; k <= 10; ++k) c.eps_grid.push_back(std::ldexp(1.0, -k));
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text, ExperimentKind fallback) {
  // The kind decides the grid defaults, so it is read first.
  ExperimentKind kind = fallback;
  {
    std::istringstream in(text);
    std::string section;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineno;
      line = trim(line.substr(0, line.find('#')));
      if (line.size() > 2 && line.front() == '[' && line.back() == ']') section = trim(line.substr(1, line.size() - 2));
      const auto eq = line.find('=');
      if (section == "experiment" && eq != std::string::npos && trim(line.substr(0, eq)) == "kind") {
        const auto k = parse_kind(trim(line.substr(eq + 1)));
        if (!k)
          fail(ErrorKind::config,
               "line " + std::to_string(lineno) + ": unknown experiment kind '" + trim(line.substr(eq + 1)) + "'");
        kind = *k;
      }
    }
  }
  ExperimentConfig c = default_config(kind);
  std::istringstream in(text);
  std::string section;
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::config, where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "result" && !setters().count(section))
        fail(ErrorKind::config, where + "unknown section [" + section + "]");
      continue;
    }
    if (section == "run" || section == "result") continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::config, where + "expected key = value");
    if (section.empty()) fail(ErrorKind::config, where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const auto& keys = setters().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) fail(ErrorKind::config, where + "unknown key '" + key + "' in [" + section + "]");
    try {
      it->second(c, line.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), where + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentKind fallback) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::config, "cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), fallback);
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[experiment]\nkind = " << to_string(c.kind) << "\n\n";
  o << "[potential]\nkind = " << c.potential.kind << "\ngamma = " << format_number(c.potential.gamma)
    << "\nxi = " << join(c.potential.xi) << "\n";
  if (!c.potential.modes.empty()) {
    o << "modes = ";
    for (std::size_t i = 0; i < c.potential.modes.size(); ++i) {
      const auto& m = c.potential.modes[i];
      o << (i ? "; " : "");
      for (int k : m.k) o << k << " ";
      o << format_number(m.c.real()) << " " << format_number(m.c.imag());
    }
    o << "\n";
  }
  o << "value = " << format_number(c.potential.value) << "\nresonance_cutoff = " << c.potential.resonance_cutoff
    << "\n\n";
  o << "[quadrature]\nabs_tol = " << format_number(c.quad.abs_tol) << "\nrel_tol = " << format_number(c.quad.rel_tol)
    << "\nmax_subdivisions = " << c.quad.max_subdivisions
    << "\npolar_refinement_radius = " << format_number(c.quad.polar_refinement_radius) << "\n\n";
  o << "[effective]\nmu_max = " << format_number(c.effective.mu_max) << "\ntable_points = " << c.effective.table_points
    << "\ncover_p = " << optional_text(c.effective.cover_p) << "\np_points = " << c.effective_p_points
    << "\np_span = " << format_number(c.effective_p_span) << "\n\n";
  o << "[grids]\nT = " << join(c.T_grid) << "\nt = " << join(c.t_grid) << "\neps = " << join(c.eps_grid)
    << "\nr_points = " << c.r_points << "\np_offsets = " << join(c.p_offsets) << "\n\n";
  o << "[observable]\nkind = " << c.observable.kind << "\nk = " << join_int(c.observable.k)
    << "\nphase = " << c.observable.phase << "\nscale = " << format_number(c.observable.scale)
    << "\nvalue = " << format_number(c.observable.value) << "\nmean = " << optional_text(c.mean) << "\n\n";
  o << "[unbounded]\nstart = " << optional_text(c.start) << "\n\n";
  o << "[inclusion]\nstride = " << format_number(c.inclusion_stride)
    << "\nmax_window = " << format_number(c.inclusion_max_window) << "\n\n";
  o << "[initial]\nkind = " << c.u0.kind << "\nslope = " << format_number(c.u0.slope)
    << "\nwidth = " << format_number(c.u0.width) << "\ncenter = " << format_number(c.u0.center)
    << "\nheight = " << format_number(c.u0.height) << "\noffset = " << format_number(c.u0.offset) << "\n\n";
  o << "[homogenize]\npoints = " << join(c.points) << "\ntime = " << format_number(c.time)
    << "\nepsilon = " << format_number(c.epsilon) << "\nfd_dx = " << format_number(c.fd_dx)
    << "\nfd_cfl = " << format_number(c.fd_cfl) << "\n\n";
  o << "[output]\ndir = " << c.out_dir << "\ncache = " << (c.cache ? "true" : "false")
    << "\ncache_dir = " << c.cache_dir << "\n\n";
  o << "[assert]\nexponent_min = " << optional_nan(c.assertions.exponent_min)
    << "\nexponent_max = " << optional_nan(c.assertions.exponent_max)
    << "\nr_squared_min = " << optional_nan(c.assertions.r_squared_min)
    << "\nmax_error = " << optional_nan(c.assertions.max_error)
    << "\nnonincreasing = " << (c.assertions.nonincreasing ? "true" : "false") << "\n";
  return o.str();
}

void validate_config(const ExperimentConfig& c) {
  c.quad.validate();
  if (c.potential.xi.empty()) fail(ErrorKind::config, "xi needs at least one component");
  if (c.potential.resonance_cutoff < 1) fail(ErrorKind::config, "resonance_cutoff must be positive");
  if (c.potential.xi.size() >= 2) {
    const auto d = estimate_diophantine(c.potential.xi, c.potential.resonance_cutoff);
    if (d.resonant) fail(ErrorKind::resonant_frequency, "xi is resonant (kappa . xi = 0 for some |kappa| <= K)");
  }
  if (!(c.effective.mu_max > 0.0) || c.effective.table_points < 4) fail(ErrorKind::config, "invalid effective table options");
  if (c.effective_p_points < 1 || !(c.effective_p_span > 0.0)) fail(ErrorKind::config, "invalid effective p grid");
  auto geometric = [](const std::vector<double>& g, const char* name) {
    if (!is_geometric(g)) fail(ErrorKind::config, std::string("grid ") + name + " must be geometric with at least 4 points");
  };
  switch (c.kind) {
    case ExperimentKind::birkhoff:
    case ExperimentKind::unbounded_mean: geometric(c.T_grid, "T"); break;
    case ExperimentKind::corrector:
    case ExperimentKind::characteristics:
      geometric(c.t_grid, "t");
      if (c.p_offsets.empty()) fail(ErrorKind::config, "p_offsets is empty");
      break;
    case ExperimentKind::inclusion:
      geometric(c.eps_grid, "eps");
      if (!(c.inclusion_stride > 0.0) || !(c.inclusion_max_window > 16.0)) fail(ErrorKind::config, "invalid inclusion window");
      break;
    case ExperimentKind::sweep: geometric(c.eps_grid, "eps"); break;
    case ExperimentKind::homogenize:
      if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) fail(ErrorKind::config, "epsilon must lie in (0, 1]");
      if (!(c.fd_dx >= 0.0)) fail(ErrorKind::config, "fd_dx must be nonnegative");
      if (!(c.fd_cfl > 0.0 && c.fd_cfl <= 1.0)) fail(ErrorKind::cfl_violation, "fd_cfl must lie in (0, 1]");
      break;
    case ExperimentKind::effective: break;
  }
  if (c.kind == ExperimentKind::homogenize || c.kind == ExperimentKind::sweep) {
    if (c.points.empty()) fail(ErrorKind::config, "evaluation points are empty");
    if (!(c.time > 0.0)) fail(ErrorKind::config, "time must be positive");
    if (c.r_points < 2) fail(ErrorKind::config, "r_points must be at least 2");
  }
  if (c.out_dir.empty()) fail(ErrorKind::config, "output dir is empty");
}

Potential make_potential(const ExperimentConfig& c) {
  const auto& p = c.potential;
  Frequency xi(p.xi);
  const std::size_t dim = p.xi.size();
  if (p.kind == "a1") return Potential(Suspension::prototype_a1(p.gamma), xi);
  if (p.kind == "a2") return Potential(Suspension::prototype_a2(p.gamma), xi);
  if (p.kind == "trig") return Potential(Suspension::trig_polynomial(p.modes, dim), xi);
  if (p.kind == "constant") return Potential(Suspension::constant(p.value, dim), xi);
  fail(ErrorKind::config, "unknown potential kind '" + p.kind + "'");
}

Observable make_observable(const ExperimentConfig& c, const Potential& P) {
  const auto& o = c.observable;
  const std::size_t dim = P.frequency().dim();
  if (o.kind == "single-mode") {
    if (o.k.size() != dim) fail(ErrorKind::config, "observable k must have one entry per frequency component");
    return single_mode_observable(o.k, o.phase);
  }
  if (o.kind == "sum-of-sines") return sum_of_sines_observable(dim);
  if (o.kind == "sqrt-u") return sqrt_u_observable(P.suspension(), o.scale);
  if (o.kind == "constant") return constant_observable(o.value, dim);
  fail(ErrorKind::config, "unknown observable kind '" + o.kind + "'");
}

InitialData make_initial(const ExperimentConfig& c) {
  const auto& u = c.u0;
  if (u.kind == "cone") return InitialData::cone(u.slope, u.width, u.center);
  if (u.kind == "affine") return InitialData::affine(u.slope, u.offset);
  if (u.kind == "smooth-bump") return InitialData::smooth_bump(u.height, u.width, u.center);
  fail(ErrorKind::config, "unknown initial data kind '" + u.kind + "'");
}

}  // namespace hjqp::cli
