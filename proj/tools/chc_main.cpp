#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "chc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary control of Cahn-Hilliard with dynamic boundary conditions"};
  app.require_subcommand(1);

  chc::CommandOptions opt;
  std::string out;
  std::uint64_t seed = 0;
  const char* names[] = {"forward", "optimize", "gradcheck", "taylor", "verify"};
  const char* help[] = {
      "Solve the state equation for the configured control",
      "Run projected gradient descent and certify the result",
      "Compare the adjoint gradient with central differences",
      "Measure the Taylor remainder slope of the control-to-state map",
      "Run the full verification suite",
  };
  for (int i = 0; i < 5; ++i) {
    auto* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", opt.config, "INI configuration file")->required();
    sub->add_option("--out", out, "Output directory (overrides run.output_dir)");
    sub->add_option("--seed", seed, "Seed (overrides run.seed)");
    sub->add_flag("--quiet", opt.quiet, "Suppress progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chc::kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  if (sub->count("--out")) opt.out = out;
  if (sub->count("--seed")) opt.seed = seed;
  return chc::run_command(sub->get_name(), opt, std::cout, std::cerr);
}
