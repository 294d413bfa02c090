// abl-lab: pre/post-selection probabilities and their counterfactual readings.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using abl::cli::Options;

  CLI::App app{"ABL-rule probabilities for pre- and post-selected systems", std::string(abl::cli::kToolName)};
  app.set_version_flag("--version", std::string(abl::cli::kToolVersion));
  app.require_subcommand(1);

  Options options;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  app.add_option("--config", options.config, "Scenario JSON file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Simulation seed (overrides config and ABL_LAB_SEED)");
  app.add_option("--out", options.out, "Write the JSON/CSV artifact and a run manifest here");
  app.add_flag("--json", options.json, "Print machine-readable JSON instead of tables");
  app.add_option("--observable", options.observable, "Restrict to one declared observable");
  auto* trials_opt = app.add_option("--trials", trials, "Override the config trial count");
  app.add_option("--threads", options.threads, "Worker threads for simulate (0 = hardware)");

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"abl", "ABL and Born probabilities for each declared observable"},
      {"sequence", "multi-time ABL distribution over the configured sequence"},
      {"simulate", "Monte Carlo trials compared against exact ABL values"},
      {"scan", "counterfactual discrepancy over a grid of spin directions"},
      {"worlds", "possible-world table for each declared observable"},
      {"cotenable", "cotenability verdict for each declared observable"},
      {"threebox", "the three-box scenario"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->fallthrough();
    if (std::string_view(s.name) == "scan") {
      sub->add_option("--steps", options.steps, "Grid steps per angle")->check(CLI::Range(2, 64));
      sub->add_flag("--sphere", options.sphere, "Sweep theta and phi for b and c (steps <= 16)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return abl::cli::kExitConfig;
  }
  if (seed_opt->count() > 0) options.seed = seed;
  if (trials_opt->count() > 0) options.trials = trials;

  const auto* chosen = app.get_subcommands().front();
  return abl::cli::run_command(chosen->get_name(), options, std::cout, std::cerr);
}
