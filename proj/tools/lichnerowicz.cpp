#include <CLI11.hpp>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for the Lichnerowicz equation on flat tori"};
  app.require_subcommand(1, 1);

  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  const char* commands[][2] = {
      {"check", "verify the standing assumptions and print the bracket"},
      {"solve", "run the monotone iteration and write u, the trace and a report"},
      {"nonexist", "evaluate the nonexistence oracle and conditions NE0-NE5"},
      {"assemble", "write the coefficient set built from the config"},
      {"manufacture", "write a manufactured coefficient set and its reference solution"},
  };
  std::vector<CLI::Option*> seed_opts;
  for (auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "dotted-path override, e.g. solver.tol_outer=1e-9");
    seed_opts.push_back(sub->add_option("--seed", seed, "seed for randomized diagnostics"));
  }

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::uint64_t> seed_opt;
  for (auto* o : seed_opts)
    if (o->count() > 0) seed_opt = seed;
  return lichnerowicz::cli::run(command, config, overrides, seed_opt, std::cout, std::cerr);
}
