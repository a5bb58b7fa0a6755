#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "seirenes/cli.hpp"
#include "seirenes/errors.hpp"

using namespace seirenes;

int main(int argc, char** argv) {
  CLI::App app{"Adversary/reasoner co-evolution trainer on a synthetic verifiable task pool"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  bool serial = false;
  bool timing = false;
  bool dump_bundles = false;
  auto* train = app.add_subcommand("train", "Run co-evolution training");
  train->add_option("--config", config_path, "JSON config (comments allowed)")->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Master seed");
  train->add_option("--steps", steps, "Collection steps");
  train->add_option("--out", out_dir, "Output directory");
  train->add_option("--workers", workers, "Collection threads (results match --serial)");
  train->add_flag("--serial", serial, "Collect bundles on one thread");
  train->add_flag("--timing", timing, "Record wall_ms (breaks byte-identical reruns)");
  train->add_flag("--dump-bundles", dump_bundles, "Write every rollout bundle to bundles.jsonl");

  std::string run_dir;
  std::size_t audit_n = 8;
  std::uint64_t audit_seed = 1;
  auto* audit = app.add_subcommand("audit", "Re-audit the mastered set of a finished run");
  audit->add_option("--run", run_dir, "Run output directory")->required();
  audit->add_option("--n", audit_n, "Fresh clean rollouts per question")->check(CLI::PositiveNumber);
  audit->add_option("--seed", audit_seed, "Audit seed");

  cli::SchedOptions sched_opts;
  auto* sched = app.add_subcommand("sched", "Simulate merged vs sequential rollout scheduling");
  sched->add_option("--scenario", sched_opts.scenario_path,
                    "Scenario JSON {r1_lengths, r2_lengths, r3_lengths, capacity[, verify_cost]}");
  sched->add_option("--sweep", sched_opts.sweep_ratios, "R2/R1 mean-length ratios; emits CSV")
      ->delimiter(',');

  std::string metrics_path;
  bool replay_csv = false;
  auto* replay = app.add_subcommand("replay", "Regenerate attack diagnostics from a metrics file");
  replay->add_option("metrics", metrics_path, "metrics.jsonl")->required();
  replay->add_flag("--csv", replay_csv, "Emit CSV instead of a table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      cli::TrainOptions opts;
      if (config_path) opts.config = load_config(*config_path);
      if (seed) opts.config.seed = *seed;
      if (steps) {
        if (*steps < 1) {
          std::cerr << "train: --steps must be at least 1\n";
          return cli::kUsage;
        }
        opts.config.steps = *steps;
      }
      if (out_dir) opts.config.output = *out_dir;
      if (workers) opts.config.workers = *workers;
      if (serial) opts.config.workers = 1;
      opts.config.validate();
      opts.timing = timing;
      opts.dump_bundles = dump_bundles;
      return cli::cmd_train(opts, std::cerr);
    }
    if (*audit) return cli::cmd_audit(run_dir, audit_n, audit_seed, std::cout, std::cerr);
    if (*sched) return cli::cmd_sched(sched_opts, std::cout, std::cerr);
    if (*replay) return cli::cmd_replay(metrics_path, replay_csv, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kFailure;
  }
  return cli::kOk;
}
