#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Multiscale entropy solvers and the teacher-student experiment"};
  cli.set_version_flag("--version", MSENT_VERSION);
  cli.require_subcommand(1);

  msent::app::CommandOptions opts;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_path, "output file (stdout when omitted)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--workers", opts.workers, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_flag("--verify,!--no-verify", opts.verify, "check the result against an oracle");
  };

  auto* tabular = cli.add_subcommand("solve-tabular", "exact solve on a finite product space");
  auto* gaussian = cli.add_subcommand("solve-gaussian", "closed-form Gaussian solve under decimation");
  auto* experiment = cli.add_subcommand("experiment", "teacher-student alpha/sigma1 sweep (CSV)");
  auto* report = cli.add_subcommand("bounds", "excess-risk bound report (JSON)");
  for (auto* sub : {tabular, gaussian, experiment, report}) add_common(sub);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : msent::app::kConfigError;
  }
  for (auto* sub : {tabular, gaussian, experiment, report}) {
    if (sub->count("--seed") > 0) opts.seed = seed;
  }

  if (*tabular) return msent::app::cmd_solve_tabular(opts, std::cerr);
  if (*gaussian) return msent::app::cmd_solve_gaussian(opts, std::cerr);
  if (*experiment) return msent::app::cmd_experiment(opts, std::cerr);
  return msent::app::cmd_bounds(opts, std::cerr);
}
