// Experiment runner: training runs and sweeps, verification suites, sweep tables.
//
// Exit codes: 0 ok, 1 configuration error, 2 divergence, 3 verification failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "reacritic/errors.hpp"
#include "reacritic/harness/experiment.hpp"
#include "reacritic/harness/verify.hpp"

namespace {

enum Exit : int { kOk = 0, kConfigError = 1, kDivergence = 2, kVerificationFailure = 3 };

}  // namespace

int main(int argc, char** argv) {
  using namespace reacritic;
  CLI::App app{"ReaCritic experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string suite = "all";
  bool quiet = false;

  auto* run = app.add_subcommand("run", "train every (sweep point, seed) of an experiment file");
  run->add_option("--config", config_path, "experiment file")->required();
  run->add_option("--seed", seed, "run this seed instead of the file's seed list");
  run->add_option("--out", out_dir, "output directory (overrides [experiment] out)");
  run->add_flag("--quiet", quiet, "no per-episode progress lines");

  auto* verify = app.add_subcommand("verify", "run the verification oracles");
  verify->add_option("--suite", suite, "grad, norm, env, flops or all")
      ->check(CLI::IsMember(harness::suite_names()));

  auto* report = app.add_subcommand("sweep-report", "tabulate final-window returns over (H, V)");
  report->add_option("--out", out_dir, "directory holding run outputs");
  report->add_option("--config", config_path, "experiment file whose output directory to read");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      const auto spec = harness::load_experiment(config_path);
      harness::RunOptions options;
      options.out = out_dir;
      if (seed) options.seeds = {*seed};
      if (!quiet) options.log = &std::cerr;
      for (const auto& r : harness::run_experiment(spec, options)) {
        std::cout << r.variant.label << " seed " << r.seed << ": first-window mean " << r.report.first_window_mean
                  << ", final-window mean " << r.report.final_window_mean << " -> " << r.directory.string() << "\n";
      }
      return kOk;
    }
    if (*verify) {
      const auto checks = harness::run_suite(suite);
      harness::print_checks(std::cout, checks);
      const bool ok = harness::all_passed(checks);
      std::cout << (ok ? "verification passed" : "verification FAILED") << " (" << checks.size() << " checks)\n";
      return ok ? kOk : kVerificationFailure;
    }
    if (*report) {
      if (out_dir.empty() && config_path.empty()) throw ConfigError("sweep-report needs --out or --config");
      const std::string dir = out_dir.empty() ? harness::load_experiment(config_path).out.string() : out_dir;
      std::cout << harness::sweep_report(dir);
      return kOk;
    }
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
