#include "seirenes/credit.hpp"

#include <cmath>

#include "seirenes/errors.hpp"

namespace seirenes {

const char* to_string(Stream stream) {
  switch (stream) {
    case Stream::Clean: return "clean";
    case Stream::Adversary: return "adversary";
    case Stream::Robust: return "robust";
  }
  return "?";
}

std::vector<double> group_advantages(std::span<const double> rewards, double eps) {
  if (rewards.empty()) throw ContractViolation("group_advantages: empty group");
  if (!(eps > 0.0)) throw ContractViolation("group_advantages: eps must be positive");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double denom = std::sqrt(var / n) + eps;
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

double adversary_reward(double p_clean, double p_hinted) {
  if (p_clean < 0.0 || p_clean > 1.0 || p_hinted < 0.0 || p_hinted > 1.0) {
    throw ContractViolation("adversary_reward: success rates must lie in [0, 1]");
  }
  return p_clean - p_hinted;
}

namespace {

std::vector<double> rewards_of(const std::vector<Trajectory>& trajs) {
  std::vector<double> r;
  r.reserve(trajs.size());
  for (const auto& t : trajs) r.push_back(t.reward.value());
  return r;
}

bool uniform_rewards(const RolloutGroup& g) {
  for (const auto& t : g.trajectories) {
    if (t.reward.value() != g.trajectories.front().reward.value()) return false;
  }
  return true;
}

}  // namespace

std::vector<RolloutGroup> build_candidate_groups(const RolloutBundle& bundle, double eps,
                                                 std::uint64_t bundle_serial) {
  std::vector<RolloutGroup> out;
  const auto q = bundle.question.id;

  RolloutGroup clean;
  clean.stream = Stream::Clean;
  clean.question = q;
  clean.trajectories = bundle.clean;
  clean.advantages = group_advantages(rewards_of(bundle.clean), eps);
  clean.birth_step = bundle.collection_step;
  clean.bundle_serial = bundle_serial;
  out.push_back(std::move(clean));

  RolloutGroup adv;
  adv.stream = Stream::Adversary;
  adv.question = q;
  adv.birth_step = bundle.collection_step;
  adv.bundle_serial = bundle_serial;
  for (std::size_t k = 0; k < bundle.hints.size(); ++k) {
    Trajectory t = bundle.hints[k];
    const double gap = adversary_reward(bundle.p_clean, bundle.p_hinted[k]);
    t.reward = gap;
    adv.trajectories.push_back(std::move(t));
    adv.advantages.push_back(gap);
  }
  out.push_back(std::move(adv));

  for (std::size_t k = 0; k < bundle.hinted.size(); ++k) {
    RolloutGroup robust;
    robust.stream = Stream::Robust;
    robust.question = q;
    robust.hint_index = k;
    robust.trajectories = bundle.hinted[k];
    robust.advantages = group_advantages(rewards_of(bundle.hinted[k]), eps);
    robust.birth_step = bundle.collection_step;
    robust.bundle_serial = bundle_serial;
    out.push_back(std::move(robust));
  }
  return out;
}

std::vector<RolloutGroup> filter_zero_advantage(std::vector<RolloutGroup> groups) {
  std::vector<RolloutGroup> out;
  out.reserve(groups.size());
  for (auto& g : groups) {
    if (g.stream == Stream::Adversary) {
      RolloutGroup kept = g;
      kept.trajectories.clear();
      kept.advantages.clear();
      for (std::size_t i = 0; i < g.trajectories.size(); ++i) {
        if (std::abs(g.advantages[i]) >= kAdversaryGapTolerance) {
          kept.trajectories.push_back(std::move(g.trajectories[i]));
          kept.advantages.push_back(g.advantages[i]);
        }
      }
      if (!kept.trajectories.empty()) out.push_back(std::move(kept));
    } else if (!g.trajectories.empty() && !uniform_rewards(g)) {
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace seirenes
