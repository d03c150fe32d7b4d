#include <CLI11.hpp>
#include <iostream>

#include "omneg/errors.hpp"
#include "omneg/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stationary optomechanical entanglement from rational noise spectra"};
  app.require_subcommand(1);

  std::string config;
  omneg::RunOptions opt;
  std::string dump_cov;
  for (const auto& verb : omneg::verbs()) {
    auto* sub = app.add_subcommand(verb);
    sub->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--dump-cov", dump_cov, "write the first covariance matrix as CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (!dump_cov.empty()) opt.dump_cov = dump_cov;

  try {
    return omneg::run_verb(app.get_subcommands().front()->get_name(), config, opt, std::cout, std::cerr);
  } catch (const omneg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const omneg::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
