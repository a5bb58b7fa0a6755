#pragma once

#include <cstdint>
#include <vector>

#include "seirenes/policy.hpp"

namespace seirenes {

struct RolloutCounts {
  std::size_t g1 = 8;  // clean answers
  std::size_t g2 = 2;  // hints
  std::size_t g3 = 8;  // answers per hint
};

// The paired R1/R2/R3 rollouts for one question and their success rates.
struct RolloutBundle {
  Question question;
  std::vector<Trajectory> clean;                // R1
  std::vector<Trajectory> hints;                // R2, adversary role
  std::vector<std::vector<Trajectory>> hinted;  // R3, hinted[k] answers under hints[k]
  double p_clean = 0.0;
  std::vector<double> p_hinted;
  std::int64_t collection_step = 0;

  std::size_t trajectory_count() const;
};

RolloutBundle collect_bundle(const PolicyParams& params, const TaskPool& pool, QuestionId q,
                             const RolloutCounts& counts, Rng& rng,
                             std::int64_t collection_step = 0);

// Mean clean reward.
double clean_success_rate(const RolloutBundle& bundle);
// Mean reward of the answers under hint k; throws ContractViolation if k >= G2.
double hinted_success_rate(const RolloutBundle& bundle, std::size_t k);

}  // namespace seirenes
