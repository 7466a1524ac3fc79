// Command-line experiment runner.  `run <config>` executes one experiment
// described by a key=value config file and writes CSV artifacts; `catalog`
// lists the built-in models.  Exit codes: 0 every check passed, 1 some check
// failed, 2 configuration error, 3 numerical failure.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nibec/config.hpp"
#include "nibec/errors.hpp"
#include "nibec/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nibec: entropy decay rates, curvature certificates and "
               "reversed-path diagnostics for diffusion processes"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config", config_path, "path to a key=value config file")
      ->required();
  CLI::App* cat = app.add_subcommand("catalog", "list the built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad invocation is a configuration error
  }

  try {
    if (cat->parsed()) {
      std::cout << nibec::catalog_listing();
      return 0;
    }
    nibec::Config cfg = nibec::Config::from_file(config_path);
    const nibec::RunOutcome out = nibec::run_experiment(cfg);
    std::cout << (out.passed ? "PASS" : "FAIL") << " (artifacts in "
              << out.output_dir << ")\n";
    return out.passed ? 0 : 1;
  } catch (const nibec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nibec::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
