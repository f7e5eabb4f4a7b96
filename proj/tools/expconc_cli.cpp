// expconc: run concentration experiments from JSON configurations.

#include "expconc/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Concentration experiments for log-concave and exp-concave measures"};
  app.set_version_flag("--version", expconc::kToolkitVersion);
  app.require_subcommand(1);

  expconc::RunOptions options;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a configuration file");
  run->add_option("config", options.config_path, "Experiment configuration (JSON)")->required();
  run->add_flag("--plot", options.plot, "Also write SVG plots");
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Seed (overrides the configuration)");

  app.add_subcommand("list-builtins", "List builtin potentials with their parameters and known eta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : expconc::exit_config_error;
  }

  if (app.got_subcommand("list-builtins")) {
    std::cout << expconc::list_builtins();
    return 0;
  }
  if (*out_opt) options.out_dir = out_dir;
  if (*seed_opt) options.seed = seed;
  return expconc::run(options, std::cout, std::cerr);
}
