#include <CLI11.hpp>

#include <iostream>

#include "blp/oracles.hpp"
#include "blp/replicate.hpp"
#include "blp/runner.hpp"

namespace {

int run(const std::string& path) {
  const blp::ExperimentConfig config = blp::load_config(path);
  const blp::RunSummary summary = blp::run_config(config, std::cerr);
  for (const auto& f : summary.files) std::cout << f << "\n";
  if (summary.failures > 0) std::cerr << summary.failures << " replication(s) failed; see the failures column\n";
  return 0;
}

int print_constants(const std::string& path) {
  const blp::ExperimentConfig config = blp::load_config(path);
  const blp::LimitLawBundle bundle(config.model.law(), config.model.stable(), config.model.slow());
  std::cout << blp::constants_json(bundle) << "\n";
  return 0;
}

int selftest() {
  bool ok = true;
  auto report = [&](const std::vector<blp::OracleCheck>& checks) {
    for (const auto& c : checks) {
      std::printf("%s  %-45s %.3e (<= %.0e)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.threshold);
      ok = ok && c.pass;
    }
  };
  report(blp::gw_oracle_suite());
  report(blp::scaling_oracle_suite());
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching Levy process extremes: simulation and limit laws"};
  app.require_subcommand(1);
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the experiments of a config file");
  run_cmd->add_option("config", config_path, "INI config")->required();
  auto* constants_cmd = app.add_subcommand("print-constants", "print the model constants as JSON");
  constants_cmd->add_option("config", config_path, "INI config")->required();
  auto* selftest_cmd = app.add_subcommand("selftest", "run the closed-form oracle checks");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    (void)blp::resolve_threads(1);
    if (*run_cmd) return run(config_path);
    if (*constants_cmd) return print_constants(config_path);
    if (*selftest_cmd) return selftest();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
