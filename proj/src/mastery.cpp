#include "seirenes/mastery.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "seirenes/errors.hpp"

namespace seirenes {

int mastery_indicator(double p_clean, std::span<const double> surviving_hinted_rates) {
  if (p_clean != 1.0) return 0;
  for (double r : surviving_hinted_rates) {
    if (r != 1.0) return 0;
  }
  return 1;
}

MasteryTracker::MasteryTracker(std::size_t pool_size, int k_m)
    : k_m_(k_m), streak_(pool_size, 0), retired_at_(pool_size) {
  if (k_m < 1) throw ConfigError("mastery.k_m: must be at least 1");
}

void MasteryTracker::check(QuestionId q) const {
  if (q >= streak_.size()) {
    throw ContractViolation("mastery: question " + std::to_string(q) + " outside pool");
  }
}

bool MasteryTracker::observe(QuestionId q, int indicator, std::int64_t step) {
  check(q);
  if (retired_at_[q]) {
    throw ContractViolation("mastery: question " + std::to_string(q) + " is already mastered");
  }
  if (indicator == 0) {
    streak_[q] = 0;
    return false;
  }
  if (++streak_[q] < k_m_) return false;
  retired_at_[q] = step;
  mastered_.push_back(q);
  return true;
}

void MasteryTracker::readmit(QuestionId q) {
  check(q);
  if (!retired_at_[q]) return;
  retired_at_[q].reset();
  streak_[q] = 0;
  mastered_.erase(std::find(mastered_.begin(), mastered_.end(), q));
}

bool MasteryTracker::is_mastered(QuestionId q) const {
  check(q);
  return retired_at_[q].has_value();
}

int MasteryTracker::streak(QuestionId q) const {
  check(q);
  return streak_[q];
}

std::optional<std::int64_t> MasteryTracker::retired_at(QuestionId q) const {
  check(q);
  return retired_at_[q];
}

std::vector<QuestionId> MasteryTracker::active() const {
  std::vector<QuestionId> out;
  out.reserve(active_count());
  for (std::size_t q = 0; q < streak_.size(); ++q) {
    if (!retired_at_[q]) out.push_back(static_cast<QuestionId>(q));
  }
  return out;
}

std::vector<QuestionId> sample_active(const MasteryTracker& tracker, std::size_t batch_size,
                                      Rng& rng) {
  auto ids = tracker.active();
  if (ids.empty()) throw TrainingComplete();
  const std::size_t take = std::min(batch_size, ids.size());
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(take);
  return ids;
}

AuditReport audit(const MasteryTracker& tracker, const PolicyParams& params, const TaskPool& pool,
                  std::size_t n, Rng& rng) {
  if (n == 0) throw ContractViolation("audit: n must be at least 1");
  AuditReport report;
  report.n = n;
  const std::size_t half = (n + 1) / 2;
  std::size_t total_correct = 0;
  std::size_t pass = 0, all = 0, one_miss = 0, below = 0;
  for (QuestionId q : tracker.mastered()) {
    auto rollouts = sample(params, pool, RoleContext::clean(q), n, rng);
    AuditEntry e;
    e.question = q;
    e.retired_at = tracker.retired_at(q).value_or(0);
    for (const auto& t : rollouts) e.correct += static_cast<std::size_t>(*t.reward);
    total_correct += e.correct;
    if (e.correct > 0) ++pass;
    if (e.correct == n) ++all;
    if (e.correct + 1 == n) ++one_miss;
    if (e.correct < half) ++below;
    report.entries.push_back(e);
  }
  report.questions = report.entries.size();
  report.rollouts = report.questions * n;
  if (report.questions > 0) {
    const double nq = static_cast<double>(report.questions);
    report.mean_at_n = static_cast<double>(total_correct) / static_cast<double>(report.rollouts);
    report.pass_at_n = static_cast<double>(pass) / nq;
    report.all_correct = static_cast<double>(all) / nq;
    report.one_miss = static_cast<double>(one_miss) / nq;
    report.below_half = static_cast<double>(below) / nq;
  }
  return report;
}

nlohmann::json to_json(const AuditReport& report) {
  nlohmann::json per_question = nlohmann::json::array();
  for (const auto& e : report.entries) {
    per_question.push_back({{"question", e.question},
                            {"retired_at", e.retired_at},
                            {"correct", e.correct},
                            {"rate", static_cast<double>(e.correct) / static_cast<double>(report.n)}});
  }
  const auto n = std::to_string(report.n);
  const auto half = std::to_string((report.n + 1) / 2);
  nlohmann::json summary = {
      {"questions", report.questions},
      {"audit_rollouts", report.rollouts},
      {"mean@" + n, report.mean_at_n},
      {"pass@" + n, report.pass_at_n},
      {n + "/" + n, report.all_correct},
      {std::to_string(report.n - 1) + "/" + n, report.one_miss},
      {"<" + half + "/" + n, report.below_half},
  };
  return {{"n", report.n}, {"summary", summary}, {"per_question", per_question}};
}

SavingsEstimate savings_estimate(std::span<const std::size_t> mastered_per_step,
                                 std::size_t pool_size, double t_r1, double t_r3, std::size_t g2) {
  if (pool_size == 0) throw ContractViolation("savings_estimate: empty pool");
  if (t_r1 < 0.0 || t_r3 < 0.0) throw ContractViolation("savings_estimate: negative times");
  SavingsEstimate est;
  est.per_step_cost = t_r1 + static_cast<double>(g2) * t_r3;
  double frac_sum = 0.0;
  for (std::size_t m : mastered_per_step) {
    const double f = static_cast<double>(m) / static_cast<double>(pool_size);
    est.per_step_fraction.push_back(f);
    est.per_step_saved.push_back(f * est.per_step_cost);
    frac_sum += f;
    est.cumulative_saved += f * est.per_step_cost;
  }
  // Computed from fractions alone so the per-step cost cancels exactly.
  if (!mastered_per_step.empty()) {
    est.cumulative_fraction = frac_sum / static_cast<double>(mastered_per_step.size());
  }
  return est;
}

SavingsEstimate savings_estimate(const MasteryTracker& tracker, double t_r1, double t_r3,
                                 std::size_t g2, std::int64_t steps) {
  std::vector<std::int64_t> retired;
  for (QuestionId q : tracker.mastered()) retired.push_back(*tracker.retired_at(q));
  std::sort(retired.begin(), retired.end());
  std::vector<std::size_t> counts;
  std::size_t idx = 0;
  for (std::int64_t s = 1; s <= steps; ++s) {
    while (idx < retired.size() && retired[idx] <= s) ++idx;
    counts.push_back(idx);
  }
  return savings_estimate(counts, tracker.pool_size(), t_r1, t_r3, g2);
}

}  // namespace seirenes
