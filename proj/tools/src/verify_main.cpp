#include "kolmo/verify/run.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Verification harness for the Kolmogorov chain estimates"};
  app.require_subcommand(1);
  kolmo::verify::RunOptions opt;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run verification suites for a scenario");
  run->add_option("--scenario", opt.scenario, "Scenario file (key = value)")->required();
  run->add_option("--suite", opt.suite, "kernel, transport, maxreg, geometry or all");
  run->add_option("--out", opt.out, "Output directory");
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_flag("--refine", opt.refine, "Run the refinement studies even if the scenario disables them");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kolmo::verify::kExitUsage;
  }
  if (seed_opt->count() > 0) opt.seed = seed;
  return kolmo::verify::run(opt, std::cout, std::cerr);
}
