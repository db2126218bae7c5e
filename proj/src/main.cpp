#include "CLI11.hpp"
#include "fb/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact verification workbench for Poisson algebras of bilinear "
               "forms and their quantum counterparts"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string backend, report;
  std::uint64_t prime = 0, seed = 0;
  int trials = 0, jobs = 1;

  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_path, "scenario file path")->required();
  auto* opt_backend =
      run->add_option("--backend", backend, "symbolic | modular");
  auto* opt_prime = run->add_option("--prime", prime, "modulus for the "
                                    "modular backend");
  auto* opt_seed = run->add_option("--seed", seed, "sampling seed");
  auto* opt_trials = run->add_option("--trials", trials, "sample count");
  auto* opt_report = run->add_option("--report", report, "report output path");
  run->add_option("--jobs", jobs, "worker threads")
      ->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list families, checks, and the "
                                          "identity catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    std::cout << fb::list_catalog();
    return 0;
  }

  fb::CliOverrides o;
  if (*opt_backend) o.backend = backend;
  if (*opt_prime) o.prime = prime;
  if (*opt_seed) o.seed = seed;
  if (*opt_trials) o.trials = trials;
  if (*opt_report) o.report = report;
  o.jobs = jobs;
  return fb::cli_run(scenario_path, o, std::cout, std::cerr);
}
