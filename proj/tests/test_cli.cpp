#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "hjqp/cli/config.hpp"
#include "hjqp/cli/report.hpp"
#include "hjqp/cli/runner.hpp"

using namespace hjqp;
using namespace hjqp::cli;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::path(HJQP_TEST_TMP_DIR) / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_tool(const std::string& args) {
  const int status = std::system((std::string(HJQP_TOOL_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<double> eps_2_3_to_2_9() {
  std::vector<double> e;
  for (int k = 3; k <= 9; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config text round trip for every experiment") {
    for (const auto& name : experiment_names()) {
      const auto kind = parse_kind(name);
      REQUIRE(kind.has_value());
      const auto c = default_config(*kind);
      const auto text = to_text(c);
      const auto back = parse_config(text);
      CHECK(back.kind == *kind);
      CHECK(to_text(back) == text);
    }
  }

  TEST_CASE("non-default values survive the round trip exactly") {
    auto c = default_config(ExperimentKind::birkhoff);
    c.potential.kind = "trig";
    c.potential.modes = {FourierMode{{0, 0}, {1.0, 0.0}}, FourierMode{{1, -2}, {0.1, 1.0 / 3.0}}};
    c.potential.xi = {1.0, std::sqrt(3.0)};
    c.quad.rel_tol = 1.0 / 7.0 * 1e-9;
    c.mean = 0.1 + 0.2;
    c.start = 0.5;
    c.effective.cover_p = 3.0;
    c.assertions.exponent_min = 0.9;
    c.assertions.nonincreasing = true;
    c.out_dir = "some dir";
    const auto back = parse_config(to_text(c));
    CHECK(to_text(back) == to_text(c));
    REQUIRE(back.potential.modes.size() == 2);
    CHECK(back.potential.modes[1].c.imag() == 1.0 / 3.0);
    CHECK(back.potential.xi[1] == std::sqrt(3.0));
    CHECK(back.quad.rel_tol == c.quad.rel_tol);
    REQUIRE(back.mean.has_value());
    CHECK(*back.mean == 0.1 + 0.2);
    CHECK(back.assertions.exponent_min == 0.9);
    CHECK(std::isnan(back.assertions.exponent_max));
    CHECK(back.out_dir == "some dir");
  }

  TEST_CASE("format_number is shortest round trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.0, -2.5e17, 1.4142135623730951}) {
      const auto s = format_number(v);
      CHECK(std::stod(s) == v);
    }
    CHECK(format_number(0.1) == "0.1");
  }

  TEST_CASE("config errors name the offending line") {
    const char* bad[] = {"[potential]\ngamm = 6\n", "[nosuch]\nx = 1\n", "[potential]\ngamma = six\n",
                         "[experiment]\nkind = fly\n", "gamma 6\n"};
    for (const char* text : bad) {
      try {
        (void)parse_config(text);
        FAIL("accepted: " << text);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
      }
    }
  }

  TEST_CASE("resonant frequency is rejected before any computation") {
    auto c = default_config(ExperimentKind::sweep);
    c.potential.xi = {1.0, 2.0};
    c.out_dir = scratch("resonant");
    try {
      validate_config(c);
      FAIL("no resonant_frequency");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::resonant_frequency);
    }
    std::string message;
    const auto o = run_guarded(c, {}, &message);
    CHECK(o.exit_code == exit_config);
    CHECK_FALSE(message.empty());
    CHECK_FALSE(std::filesystem::exists(c.out_dir));

    const auto path = scratch("resonant.cfg");
    std::filesystem::create_directories(HJQP_TEST_TMP_DIR);
    std::ofstream(path) << "[experiment]\nkind = sweep\n[potential]\nxi = 1, 2\n[output]\ndir = " << c.out_dir << "\n";
    CHECK(run_tool("sweep --config " + path) == exit_config);
    CHECK_FALSE(std::filesystem::exists(c.out_dir));
  }

  TEST_CASE("exit codes") {
    CHECK(exit_code_for(ErrorKind::config) == 2);
    CHECK(exit_code_for(ErrorKind::resonant_frequency) == 2);
    CHECK(exit_code_for(ErrorKind::cfl_violation) == 2);
    CHECK(exit_code_for(ErrorKind::divergence_suspected) == 3);
    CHECK(exit_code_for(ErrorKind::stationary) == 3);
    CHECK(run_tool("nosuch") != 0);
    CHECK(run_tool("validate --config /nonexistent/x.cfg") == exit_config);
  }

  TEST_CASE("CSV quoting follows RFC 4180") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CHECK(csv_row({"a", "b,c"}) == "a,\"b,c\"\r\n");
    CsvTable t({"name", "value"});
    t.add({"x,y", "1"});
    t.add({"q\"uote", "line\r\nbreak"});
    t.add({"", "3"});
    CHECK(t.rows() == 3);
    const auto rows = parse_csv(t.str());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"name", "value"});
    CHECK(rows[1] == std::vector<std::string>{"x,y", "1"});
    CHECK(rows[2] == std::vector<std::string>{"q\"uote", "line\r\nbreak"});
    CHECK(rows[3] == std::vector<std::string>{"", "3"});
  }

  TEST_CASE("SVG plots are standalone") {
    PlotSpec p{"t<itle> & more", "x", "y", true, true, {}};
    p.series.push_back({"data", {1, 10, 100}, {1, 0.1, 0.01}, false});
    p.series.push_back(fit_series(RateFit{1.0, 0.0, 1.0, FitModel::power_law, 3}, 1.0, 100.0, "fit"));
    const auto svg = render_svg(p);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("href") == std::string::npos);
    CHECK(svg.find("<image") == std::string::npos);
    CHECK(svg.find("t<itle>") == std::string::npos);
  }

  TEST_CASE("unwritable output directory is a config error") {
    auto c = default_config(ExperimentKind::effective);
    c.out_dir = "/proc/hjqp-cannot-write";
    const auto o = run_guarded(c, {});
    CHECK(o.exit_code == exit_config);
  }

  TEST_CASE("validate reports hypotheses and predicted exponents") {
    auto c = default_config(ExperimentKind::sweep);
    c.potential.gamma = 6.0;
    const auto six = validate(c);
    CHECK(six.p1);
    CHECK(six.p4);
    CHECK(six.sigma == doctest::Approx(1.0).epsilon(0.05));
    CHECK(six.lower_exponent == doctest::Approx(1.0));
    CHECK(six.upper_exponent == doctest::Approx(0.25));
    CHECK_FALSE(six.lines.empty());

    c.potential.gamma = 1.0;
    const auto one = validate(c);
    CHECK(one.lower_exponent == doctest::Approx(0.5));
    CHECK(one.row != six.row);

    c.potential.gamma = 2.0;
    CHECK(validate(c).upper_logarithmic);
  }

  TEST_CASE("sweep writes 7 rows per point and a rate fit") {
    auto c = default_config(ExperimentKind::sweep);
    c.potential.gamma = 6.0;
    c.eps_grid = eps_2_3_to_2_9();
    c.points = {0.0, 0.5};
    c.out_dir = scratch("sweep");
    RunOptions opt;
    opt.plot = true;
    const auto o = run(c, opt);
    CHECK(o.exit_code == exit_ok);
    const auto rows = parse_csv(slurp(c.out_dir + "/sweep.csv"));
    REQUIRE(rows.size() == 1 + 7 * 2);
    std::map<std::string, int> per_point;
    for (std::size_t i = 1; i < rows.size(); ++i) ++per_point[rows[i][1]];
    CHECK(per_point.size() == 2);
    for (const auto& [x, n] : per_point) CHECK(n == 7);
    REQUIRE(o.fit.has_value());
    CHECK(o.fit->sample_count == 7);
    bool fit_line = false;
    for (const auto& s : o.summary) fit_line = fit_line || s.rfind("fit = ", 0) == 0;
    CHECK(fit_line);
    CHECK(std::filesystem::exists(c.out_dir + "/sweep.svg"));
    CHECK(std::filesystem::exists(c.out_dir + "/sweep_rates.csv"));
    CHECK(slurp(c.out_dir + "/manifest.cfg").find("fit = ") != std::string::npos);
  }

  TEST_CASE("rerunning from a manifest reproduces the outputs") {
    auto c = default_config(ExperimentKind::effective);
    c.potential.gamma = 1.0;
    c.effective_p_points = 5;
    c.out_dir = scratch("manifest");
    (void)run(c, {});
    auto again = load_config(c.out_dir + "/manifest.cfg");
    CHECK(again.kind == c.kind);
    CHECK(again.potential.gamma == 1.0);
    CHECK(again.effective_p_points == 5);
    CHECK(again.effective.cover_p.has_value());
    again.out_dir = scratch("manifest-rerun");
    (void)run(again, {});
    CHECK(slurp(again.out_dir + "/effective.csv") == slurp(c.out_dir + "/effective.csv"));
    CHECK(load_config(again.out_dir + "/manifest.cfg").effective.cover_p == again.effective.cover_p);
  }

  TEST_CASE("cached effective model gives bit-identical u_hom") {
    auto c = default_config(ExperimentKind::homogenize);
    c.potential.gamma = 6.0;
    c.points = {-0.5, 0.0, 0.7};
    c.epsilon = 0.25;
    c.out_dir = scratch("cached-a");
    c.cache_dir = scratch("cache");
    (void)run(c, {});
    const auto first = slurp(c.out_dir + "/homogenize.csv");
    std::size_t cached = 0;
    for (const auto& e : std::filesystem::directory_iterator(c.cache_dir)) cached += e.path().extension() == ".csv";
    CHECK(cached == 1);
    c.out_dir = scratch("cached-b");
    (void)run(c, {});
    CHECK(slurp(c.out_dir + "/homogenize.csv") == first);

    c.cache = false;
    c.out_dir = scratch("uncached");
    (void)run(c, {});
    const auto fresh = parse_csv(slurp(c.out_dir + "/homogenize.csv"));
    const auto old = parse_csv(first);
    REQUIRE(fresh.size() == old.size());
    for (std::size_t i = 1; i < old.size(); ++i) CHECK(fresh[i][4] == old[i][4]);
  }

  TEST_CASE("assert mode flags a missed threshold") {
    auto c = default_config(ExperimentKind::effective);
    c.potential.gamma = 1.0;
    c.effective_p_points = 5;
    c.assertions.exponent_min = 0.5;
    c.out_dir = scratch("assert");
    RunOptions opt;
    opt.assert_mode = true;
    const auto o = run_guarded(c, opt);
    CHECK(o.exit_code == exit_assertion);
    CHECK_FALSE(o.assertion_failures.empty());
  }
}
