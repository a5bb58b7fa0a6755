#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seirenes/credit.hpp"
#include "seirenes/policy.hpp"

namespace seirenes {

// Realized attack pressure p̄1 − p̄3 in percentage points.
double attack_strength(double p1_bar, double p3_bar);

struct StreamStepMetrics {
  std::size_t queue_len = 0;
  bool flushed = false;
  std::size_t evicted = 0;
  std::optional<double> loss;
  std::optional<double> grad_norm;
  std::optional<double> clip_frac;
  std::optional<double> approx_kl;
  double entropy = 0.0;
};

// One record per rollout-collection step.
struct StepMetrics {
  std::int64_t step = 0;
  double p1_bar = 0.0;
  double p3_bar = 0.0;
  std::array<StreamStepMetrics, kStreamCount> streams{};
  std::size_t mastered_count = 0;
  std::size_t active_pool_size = 0;
  std::size_t batch_size = 0;
  std::int64_t optimizer_step = 0;
  double wall_ms = 0.0;

  double delta_attack() const { return attack_strength(p1_bar, p3_bar); }
  StreamStepMetrics& stream(Stream s) { return streams[static_cast<std::size_t>(s)]; }
  const StreamStepMetrics& stream(Stream s) const { return streams[static_cast<std::size_t>(s)]; }
};

nlohmann::ordered_json to_json(const StepMetrics& m);
StepMetrics step_metrics_from_json(const nlohmann::json& j);

// Reads a metrics JSONL file; lines without a "step" key (the header) are
// skipped.
std::vector<StepMetrics> read_metrics(std::istream& in);
std::vector<double> attack_trace(std::span<const StepMetrics> metrics);

// Share of steps with delta_attack > threshold (pp).
double tail_frequency(std::span<const double> trace_pp, double threshold_pp);
// Longest run of consecutive steps above the threshold.
std::size_t longest_streak(std::span<const double> trace_pp, double threshold_pp);
std::size_t strong_steps(std::span<const double> trace_pp, double threshold_pp);

inline constexpr double kStrongAttackPp = 5.0;
inline constexpr std::size_t kSmoothingWindow = 21;

struct SaturationSplit {
  double early = 0.0;  // strong-step share over the first ceil(n/2) steps
  double late = 0.0;   // and over the rest
  double slope = 0.0;  // %/step, OLS on the trailing moving average of the indicator
};

// Needs at least two steps. A window longer than the trace is clamped to the
// trace length.
SaturationSplit saturation_split(std::span<const double> trace_pp, double threshold_pp,
                                 std::size_t window = kSmoothingWindow);

// Tail frequencies per threshold, saturation split and streaks of one trace.
struct AttackSummary {
  std::vector<double> thresholds;
  std::vector<double> tail;  // per threshold, fraction
  SaturationSplit saturation;
  std::size_t longest_streak = 0;
  std::size_t total_strong = 0;
  std::size_t steps = 0;
};

inline constexpr std::array<double, 3> kDefaultThresholds = {3.0, 4.0, 5.0};

AttackSummary summarize_attack(std::span<const double> trace_pp,
                               std::span<const double> thresholds = kDefaultThresholds);

std::string summary_text(const AttackSummary& s, const std::string& run_name = "run");
std::string summary_csv(const AttackSummary& s, const std::string& run_name = "run");

// Share of clean-correct probability mass lost under hints drawn from the
// current adversary, computed exactly by enumerating hints:
// mean_q E_h[max(0, p_clean − p_hinted) / p_clean].
double hint_flip_rate(const PolicyParams& params, const TaskPool& pool);
double hint_flip_rate(const PolicyParams& params, const TaskPool& pool, QuestionId q);

// Exact expected clean success averaged over the pool.
double expected_clean_success(const PolicyParams& params, const TaskPool& pool);

}  // namespace seirenes
