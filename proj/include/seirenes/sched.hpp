#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace seirenes::sched {

// Token-step cost model of a continuous-batching engine: `capacity` slots,
// FIFO admission, no preemption, every active sequence emits one token per
// step. Times are in token-steps.
struct Scenario {
  std::vector<std::int64_t> r1_lengths;
  std::vector<std::int64_t> r2_lengths;
  std::vector<std::int64_t> r3_lengths;
  std::int64_t capacity = 1;
  std::int64_t verify_cost = 0;

  // Throws ContractViolation on empty stages, lengths < 1 or capacity < 1.
  void validate() const;
};

struct Result {
  std::int64_t t_sequential = 0;
  std::int64_t t_merged = 0;
  std::int64_t t12 = 0;
  std::int64_t t_r1 = 0;
  double bubble_fill = 0.0;  // share of R2 tokens served while R1 is still running
};

// Start/finish time of every sequence, in admission order.
struct Timeline {
  std::vector<std::int64_t> start;
  std::vector<std::int64_t> finish;
  std::int64_t makespan = 0;
};

Timeline schedule(std::span<const std::int64_t> lengths, std::int64_t capacity);

// Completion time of the whole batch.
std::int64_t simulate_batch(std::span<const std::int64_t> lengths, std::int64_t capacity);

// R1, R1 verification, R2 and R3 as back-to-back stages.
Result simulate_sequential(const Scenario& s);
// R1 and R2 share one continuous batch (R1 admitted first); R1 verification
// overlaps R3 generation. Fills every Result field.
Result simulate_merged(const Scenario& s);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

struct SweepRow {
  double ratio = 0.0;  // mean R2 length / mean R1 length
  Result result;
};

// Rescales R2 lengths so their mean is `ratio` times the R1 mean (rounded,
// at least 1 token), keeping R1, R3 and capacity fixed.
std::vector<SweepRow> sweep_r2_ratio(const Scenario& base, std::span<const double> ratios);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string result_table(const Scenario& s, const Result& r);

}  // namespace seirenes::sched
