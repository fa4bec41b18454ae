// Command-line driver: kvwave <kind> --config <path> [--out <dir>] [--jobs N] [--set k=v]...

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kvwave/experiment.hpp"

int main(int argc, char** argv) {
  namespace cli = kvwave::cli;

  CLI::App app{"Damped wave experiments"};
  std::string kind, config_path, out_dir;
  unsigned jobs = 1;
  std::vector<std::string> overrides;
  app.add_option("kind", kind, "simulate | spectrum | resolvent | decay | transmission-check | carleman-check | helmholtz-check")
      ->required();
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "output directory (default: out/<kind>)");
  app.add_option("--jobs", jobs, "worker threads for parameter sweeps")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "override a config entry, e.g. --set damping.d=0.5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    cli::Json config = cli::load_config(config_path);
    for (const auto& o : overrides) cli::apply_override(config, o);
    const auto result = cli::run_experiment(kind, config, out_dir.empty() ? "out/" + kind : out_dir, jobs);
    for (const auto& c : result.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " tol=" << c.tol << '\n';
    return result.exit_code();
  } catch (const cli::ConfigError& e) {
    std::cerr << "kvwave: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "kvwave: " << e.what() << '\n';
    return 1;
  }
}
