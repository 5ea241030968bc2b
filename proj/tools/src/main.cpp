#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "hjqp/cli/config.hpp"
#include "hjqp/cli/runner.hpp"

using namespace hjqp;
using namespace hjqp::cli;

int main(int argc, char** argv) {
  CLI::App app{"Homogenization experiments for quasi-periodic Hamilton-Jacobi equations"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool assert_mode = false, plot = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_flag("--assert", assert_mode, "exit with a distinct code when an [assert] threshold is missed");
    sub->add_flag("--plot", plot, "also write an SVG plot");
  };
  for (const auto& name : experiment_names()) add_common(app.add_subcommand(name, "run the " + name + " experiment"));
  add_common(app.add_subcommand("validate", "report which hypotheses hold and the predicted exponents"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  const auto kind = parse_kind(name);

  ExperimentConfig config;
  try {
    const ExperimentKind fallback = kind.value_or(ExperimentKind::sweep);
    config = config_path.empty() ? default_config(fallback) : load_config(config_path, fallback);
    if (kind && config.kind != *kind)
      fail(ErrorKind::config, "config describes '" + to_string(config.kind) + "' but '" + name + "' was requested");
    if (!kind) {
      for (const auto& l : validate(config).lines) std::cout << l << "\n";
      return exit_ok;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }

  RunOptions opt;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  opt.assert_mode = assert_mode;
  opt.plot = plot;
  std::string message;
  const auto outcome = run_guarded(config, opt, &message);
  if (!message.empty()) std::cerr << "error: " << message << "\n";
  for (const auto& l : outcome.summary) std::cout << l << "\n";
  for (const auto& f : outcome.files) std::cout << "wrote " << f << "\n";
  for (const auto& f : outcome.assertion_failures) std::cerr << "assertion failed: " << f << "\n";
  return outcome.exit_code;
}
