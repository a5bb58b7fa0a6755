#include "seirenes/bundle.hpp"

#include <string>

#include "seirenes/errors.hpp"

namespace seirenes {

namespace {

double mean_reward(const std::vector<Trajectory>& trajs) {
  double s = 0.0;
  for (const auto& t : trajs) s += t.reward.value();
  return s / static_cast<double>(trajs.size());
}

}  // namespace

std::size_t RolloutBundle::trajectory_count() const {
  std::size_t n = clean.size() + hints.size();
  for (const auto& group : hinted) n += group.size();
  return n;
}

RolloutBundle collect_bundle(const PolicyParams& params, const TaskPool& pool, QuestionId q,
                             const RolloutCounts& counts, Rng& rng,
                             std::int64_t collection_step) {
  if (counts.g1 == 0 || counts.g2 == 0 || counts.g3 == 0) {
    throw ContractViolation("collect_bundle: g1, g2, g3 must be at least 1");
  }
  RolloutBundle b;
  b.question = pool.at(q);
  b.collection_step = collection_step;

  b.clean = sample(params, pool, RoleContext::clean(q), counts.g1, rng, collection_step);
  b.hints = sample(params, pool, RoleContext::adversary(q), counts.g2, rng, collection_step);
  b.hinted.reserve(counts.g2);
  for (const auto& hint : b.hints) {
    b.hinted.push_back(
        sample(params, pool, RoleContext::hinted(q, hint.tokens), counts.g3, rng, collection_step));
  }

  b.p_clean = clean_success_rate(b);
  b.p_hinted.resize(counts.g2);
  for (std::size_t k = 0; k < counts.g2; ++k) b.p_hinted[k] = hinted_success_rate(b, k);
  return b;
}

double clean_success_rate(const RolloutBundle& bundle) {
  if (bundle.clean.empty()) throw ContractViolation("clean_success_rate: no clean rollouts");
  return mean_reward(bundle.clean);
}

double hinted_success_rate(const RolloutBundle& bundle, std::size_t k) {
  if (k >= bundle.hinted.size()) {
    throw ContractViolation("hinted_success_rate: hint index " + std::to_string(k) +
                            " outside bundle of " + std::to_string(bundle.hinted.size()));
  }
  if (bundle.hinted[k].empty()) throw ContractViolation("hinted_success_rate: empty group");
  return mean_reward(bundle.hinted[k]);
}

}  // namespace seirenes
