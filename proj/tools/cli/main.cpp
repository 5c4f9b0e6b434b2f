#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "vmilan/parallel.hpp"

int main(int argc, char** argv) {
  using namespace vmilan::cli;

  CLI::App app{"vmilan: variable-metric inexact-linesearch proximal gradient experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides overrides;
  std::uint64_t seed = 0;
  int max_iters = 0;
  std::string trace;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_flag("--audit", overrides.audit, "Audit the trace; exit nonzero on any violation");
  auto* iters_opt = app.add_option("--max-iters", max_iters, "Override solver.max_outer_iters")
                        ->check(CLI::NonNegativeNumber);
  auto* trace_opt = app.add_option("--trace", trace, "Write the iteration trace to this path");

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "Run the experiment described by a config file");
  solve->add_option("config", config_path, "YAML experiment file")->required();

  auto* degrade = app.add_subcommand("degrade", "Blur and add noise to the configured image");
  degrade->add_option("config", config_path, "YAML experiment file")->required();

  std::string scope;
  bool inject = false;
  auto* check = app.add_subcommand("check", "Run the built-in oracle and audit suites");
  check->add_option("scope", scope, "adjoints | gradients | prox | invariants | all")
      ->required()
      ->check(CLI::IsMember({"adjoints", "gradients", "prox", "invariants", "all"}));
  check->add_flag("--inject-gradient-bug", inject, "Perturb gradients to exercise the failure path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    vmilan::configure_threads_from_env();
  } catch (const std::exception& e) {
    std::cerr << "bad VMILAN_THREADS: " << e.what() << '\n';
    return kExitUsage;
  }
  if (*seed_opt) overrides.seed = seed;
  if (*iters_opt) overrides.max_iters = max_iters;
  if (*trace_opt) overrides.trace = trace;

  if (*solve) return cmd_solve(config_path, overrides, std::cout, std::cerr);
  if (*degrade) return cmd_degrade(config_path, overrides, std::cout, std::cerr);
  CheckOptions options;
  if (overrides.seed) options.seed = *overrides.seed;
  options.inject_gradient_bug = inject;
  return cmd_check(scope, options, std::cout, std::cerr);
}
