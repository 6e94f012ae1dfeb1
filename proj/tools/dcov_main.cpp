// dcov command line: batch experiment driver.
//
//   dcov simulate    --config cfg.json [--out dir] [--seed n] [--workers n]
//   dcov reference   --config cfg.json ...
//   dcov sweep       --config cfg.json ...
//   dcov noise-check --config cfg.json ...
//   dcov validate    --config cfg.json

#include <CLI11.hpp>

#include "dcov/cli.hpp"
#include "dcov/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dcov: stochastic double-covariance simulator of open and "
               "closed quantum dynamics"};
  app.set_version_flag("--version", dcov::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  dcov::CliOverrides ov;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--workers", workers, "worker thread count override");
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run one (epsilon, ensemble) pipeline point");
  CLI::App* reference = app.add_subcommand(
      "reference", "integrate the deterministic reference dynamics");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "epsilon sweep with scaling-law fit");
  CLI::App* noise_check = app.add_subcommand(
      "noise-check", "empirical noise correlation diagnostics");
  CLI::App* validate = app.add_subcommand(
      "validate", "config-only dry run");
  for (CLI::App* sub : {simulate, reference, sweep, noise_check, validate})
    add_common(sub);

  CLI11_PARSE(app, argc, argv);

  auto fill = [&](CLI::App* sub) {
    if (sub->count("--out")) ov.out_dir = out_dir;
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--workers")) ov.workers = workers;
  };

  if (simulate->parsed()) {
    fill(simulate);
    return dcov::cmd_simulate(config_path, ov);
  }
  if (reference->parsed()) {
    fill(reference);
    return dcov::cmd_reference(config_path, ov);
  }
  if (sweep->parsed()) {
    fill(sweep);
    return dcov::cmd_sweep(config_path, ov);
  }
  if (noise_check->parsed()) {
    fill(noise_check);
    return dcov::cmd_noise_check(config_path, ov);
  }
  if (validate->parsed()) {
    fill(validate);
    return dcov::cmd_validate(config_path, ov);
  }
  return 1;
}
