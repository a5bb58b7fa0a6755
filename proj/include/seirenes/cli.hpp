#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seirenes/config.hpp"
#include "seirenes/diagnostics.hpp"
#include "seirenes/mastery.hpp"

namespace seirenes::cli {

// Exit statuses shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kAborted = 3;  // training stopped on a non-finite update

inline constexpr const char* kMetricsFormat = "seirenes-metrics/1";

// Files a training run writes into its output directory.
inline constexpr const char* kMetricsFile = "metrics.jsonl";
inline constexpr const char* kCheckpointFile = "policy.ckpt";
inline constexpr const char* kPoolFile = "pool.txt";
inline constexpr const char* kMasteryFile = "mastery.json";
inline constexpr const char* kAuditFile = "audit.json";
inline constexpr const char* kBundleFile = "bundles.jsonl";

struct TrainOptions {
  RunConfig config;
  bool timing = false;        // record wall_ms; breaks byte-identical reruns
  bool dump_bundles = false;  // one JSON object per collected bundle
};

// First line of every metrics file.
nlohmann::ordered_json metrics_header(const RunConfig& config);

nlohmann::ordered_json to_json(const RolloutBundle& bundle, std::int64_t collection_step);

// Runs training into config.output. Progress and diagnostics go to `log`.
int cmd_train(const TrainOptions& opts, std::ostream& log);

// Re-audits the mastered set of a finished run with fresh clean rollouts.
int cmd_audit(const std::string& run_dir, std::size_t n, std::uint64_t seed, std::ostream& out,
              std::ostream& err);

struct SchedOptions {
  std::optional<std::string> scenario_path;  // worked example when unset
  std::vector<double> sweep_ratios;          // CSV sweep when non-empty
};

int cmd_sched(const SchedOptions& opts, std::ostream& out, std::ostream& err);

struct ReplayOutput {
  std::vector<StepMetrics> metrics;
  AttackSummary summary;
  std::string text;
  std::string csv;
};

// Rebuilds every diagnostic table from a metrics stream alone.
ReplayOutput replay(std::istream& metrics, const std::string& run_name);

int cmd_replay(const std::string& metrics_path, bool csv, std::ostream& out, std::ostream& err);

}  // namespace seirenes::cli
