#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "epidisc/config.hpp"
#include "epidisc/error.hpp"
#include "epidisc/pipeline.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discretize epidemic dynamics into a finite MDP and evaluate lockdown policies"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::optional<std::string> out_dir;
  bool two_switch = false;
  std::optional<std::string> stage;
  bool quiet = false;

  app.add_option("--config", config_path, "Experiment config file")->required();
  app.add_option("--seed", seed, "Root seed (overrides the config)");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_flag("--two-switch", two_switch, "Also solve the single-lockdown-window problem");
  app.add_option("--stage", stage, "Run only this stage");
  app.add_flag("--quiet", quiet, "No progress output");

  std::optional<epidisc::Stage> subcommand_stage;
  app.add_subcommand("run", "Run the full pipeline (default)");
  for (const char* name : {"discretize", "transitions", "solve", "evaluate", "trajectory"}) {
    app.add_subcommand(name, std::string("Run the ") + name + " stage from existing files");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    epidisc::ExperimentConfig config = epidisc::load_config(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    if (two_switch) config.two_switch = true;
    config.validate();

    for (const CLI::App* sub : app.get_subcommands()) {
      if (sub->get_name() != "run") subcommand_stage = epidisc::parse_stage(sub->get_name());
    }
    if (stage) {
      const epidisc::Stage flagged = epidisc::parse_stage(*stage);
      if (subcommand_stage && *subcommand_stage != flagged) {
        throw epidisc::ConfigError(0, "--stage disagrees with the subcommand");
      }
      subcommand_stage = flagged;
    }

    epidisc::RunOptions options;
    options.workers = workers;
    options.log = quiet ? nullptr : &std::cerr;
    if (subcommand_stage) {
      epidisc::run_stage(config, *subcommand_stage, options);
    } else {
      epidisc::run_pipeline(config, options);
    }
  } catch (const epidisc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
