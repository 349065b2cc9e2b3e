#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "barelay/experiment.hpp"
#include "barelay/verification.hpp"

namespace {

struct RunArgs {
  std::string config;
  barelay::SpecOverrides overrides;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
  auto& o = args.overrides;
  cmd->add_option("--config", args.config, "JSON experiment configuration");
  cmd->add_option("--experiment", o.experiment,
                  "rate-vs-snr | mu-convergence | delay-convergence | rate-vs-m | analytical");
  cmd->add_option("--snr-db", o.snr_db, "comma-separated SNR values in dB");
  cmd->add_option("--relays", o.relays, "comma-separated relay counts");
  cmd->add_option("--slots", o.num_slots, "time slots per simulation");
  cmd->add_option("--seed", o.seed, "base random seed");
  cmd->add_option("--protocol", o.protocols,
                  "comma-separated: conventional, genie, adaptive, max-link, delay-limited");
  cmd->add_option("--delay-target", o.delay_targets, "comma-separated delay targets in slots");
  cmd->add_option("--omega-sr", o.omega_sr, "comma-separated mean source-relay gains");
  cmd->add_option("--omega-rd", o.omega_rd, "comma-separated mean relay-destination gains");
  cmd->add_option("--stride", o.metric_stride, "slots between trajectory samples");
  cmd->add_option("--workers", o.workers, "worker threads (0: hardware concurrency)");
  cmd->add_option("--out", o.out, "output file (default: $BARELAY_OUTPUT_DIR or stdout)");
  cmd->add_option("--format", o.format, "csv | records");
}

int run(const RunArgs& args, barelay::ExperimentKind default_kind) {
  using namespace barelay;
  std::optional<std::filesystem::path> config;
  if (!args.config.empty()) config = args.config;
  ExperimentSpec spec;
  try {
    spec = parse_config(config, args.overrides, default_kind);
  } catch (const ConfigError& e) {
    std::cerr << "barelay: invalid configuration: " << e.what() << '\n';
    return 2;
  }
  const ExperimentResult result = run_experiment(spec);
  const auto path = write_outputs(spec, result, std::cout);
  if (!path.empty()) std::cerr << "wrote " << path.string() << '\n';
  if (result.error_rows > 0) {
    std::cerr << "barelay: " << result.error_rows << " row(s) carry an error marker\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Buffer-aided relay selection: simulation and analysis"};
  app.set_version_flag("--version", barelay::kVersion);
  app.require_subcommand(1);

  RunArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "run a Monte-Carlo experiment sweep");
  add_run_options(simulate, simulate_args);

  RunArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "evaluate the analytical rates");
  add_run_options(analyze, analyze_args);

  std::uint64_t verify_seed = 1;
  std::vector<int> verify_only;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--seed", verify_seed, "base random seed");
  verify->add_option("--only", verify_only, "criterion ids to run")
      ->check(CLI::Range(1, barelay::kAcceptanceCriteria));

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run(simulate_args, barelay::ExperimentKind::RateVsSnr);
    if (analyze->parsed()) return run(analyze_args, barelay::ExperimentKind::AnalyticalOnly);

    barelay::VerificationOptions options{.seed = verify_seed};
    if (verify_only.empty())
      for (int id = 1; id <= barelay::kAcceptanceCriteria; ++id) verify_only.push_back(id);
    int failures = 0;
    for (int id : verify_only) {
      const auto result = barelay::run_criterion(id, options);
      barelay::print_result(std::cout, result);
      std::cout.flush();
      if (!result.passed) ++failures;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
              << '\n';
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "barelay: " << e.what() << '\n';
    return 1;
  }
}
