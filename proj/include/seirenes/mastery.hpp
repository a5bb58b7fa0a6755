#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "seirenes/policy.hpp"

namespace seirenes {

// Robust: clean success and success under every surviving hint.
// CleanOnly: the clean-success-alone comparison sampler.
enum class MasteryCriterion { Robust, CleanOnly };

// 1 iff p_clean == 1 and every listed hinted rate == 1 (vacuous when empty).
int mastery_indicator(double p_clean, std::span<const double> surviving_hinted_rates);

class MasteryTracker {
 public:
  explicit MasteryTracker(std::size_t pool_size, int k_m = 1);

  // Records one evaluation of an active question. Returns true when this
  // observation retires it. Throws ContractViolation for mastered questions.
  bool observe(QuestionId q, int indicator, std::int64_t step);

  // Puts a retired question back into the active pool (off by default in
  // training; only the re-admission switch calls it).
  void readmit(QuestionId q);

  bool is_mastered(QuestionId q) const;
  int streak(QuestionId q) const;
  std::optional<std::int64_t> retired_at(QuestionId q) const;
  int k_m() const { return k_m_; }
  std::size_t pool_size() const { return streak_.size(); }
  std::size_t mastered_count() const { return mastered_.size(); }
  std::size_t active_count() const { return pool_size() - mastered_count(); }

  // Ascending ids.
  std::vector<QuestionId> active() const;
  // In retirement order.
  const std::vector<QuestionId>& mastered() const { return mastered_; }

 private:
  void check(QuestionId q) const;

  int k_m_;
  std::vector<int> streak_;
  std::vector<std::optional<std::int64_t>> retired_at_;
  std::vector<QuestionId> mastered_;
};

// Uniform sample without replacement from the active pool; the batch is
// capped at the active-pool size. Throws TrainingComplete when empty.
std::vector<QuestionId> sample_active(const MasteryTracker& tracker, std::size_t batch_size,
                                      Rng& rng);

struct AuditEntry {
  QuestionId question = 0;
  std::int64_t retired_at = 0;
  std::size_t correct = 0;
};

// Post-hoc check of retired questions with n fresh clean rollouts each.
struct AuditReport {
  std::size_t n = 0;
  std::size_t questions = 0;
  std::size_t rollouts = 0;
  double mean_at_n = 0.0;    // mean accuracy over all audit rollouts
  double pass_at_n = 0.0;    // at least one correct
  double all_correct = 0.0;  // n/n
  double one_miss = 0.0;     // (n-1)/n
  double below_half = 0.0;   // fewer than ceil(n/2) correct
  std::vector<AuditEntry> entries;
};

AuditReport audit(const MasteryTracker& tracker, const PolicyParams& params, const TaskPool& pool,
                  std::size_t n, Rng& rng);

nlohmann::json to_json(const AuditReport& report);

// Linear upper-bound model of rollout time spent on retired questions:
// saved(s) = |M_s| / |D| · (T_R1 + G2 · T_R3).
struct SavingsEstimate {
  double per_step_cost = 0.0;  // T_R1 + G2·T_R3
  std::vector<double> per_step_fraction;
  std::vector<double> per_step_saved;
  double cumulative_fraction = 0.0;  // mean of per-step fractions
  double cumulative_saved = 0.0;
};

SavingsEstimate savings_estimate(std::span<const std::size_t> mastered_per_step,
                                 std::size_t pool_size, double t_r1, double t_r3, std::size_t g2);
// Uses the tracker's retirement steps for steps 1..steps.
SavingsEstimate savings_estimate(const MasteryTracker& tracker, double t_r1, double t_r3,
                                 std::size_t g2, std::int64_t steps);

}  // namespace seirenes
