// Batch front end: runs an SNR sweep described by a config file and writes
// results.csv + manifest.json into the output directory.

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccs/cli_app.hpp"
#include "ccs/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Coupled-compressive-sensing neighbor discovery simulator"};
  app.set_version_flag("--version", std::string(ccs::kVersion));

  ccs::RunOptions opt;
  std::vector<double> snr;
  std::uint64_t seed = 0;
  int trials = 0;

  app.add_option("--config", opt.config_path, "experiment config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", opt.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "master seed override");
  auto* snr_opt = app.add_option("--snr", snr, "SNR grid override, dB");
  auto* trials_opt = app.add_option("--trials", trials, "trials-per-point override");

  CLI11_PARSE(app, argc, argv);

  if (!seed_opt->empty()) opt.seed_override = seed;
  if (!snr_opt->empty()) opt.snr_override = snr;
  if (!trials_opt->empty()) opt.trials_override = trials;

  return ccs::run_app(opt);
}
