#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seirenes/credit.hpp"
#include "seirenes/policy.hpp"

namespace seirenes {

enum class OptimizerKind { PlainGradient, AdaptiveMoment };

// How per-unit losses inside one flush are combined. A unit is a clean
// group, a question's set of robust groups, or an adversary group.
enum class Aggregation { Sum, Mean };

struct UpdateConfig {
  double clip_low = 0.2;
  double clip_high = 0.28;
  double kl_beta = 0.0;
  double lr = 0.1;
  OptimizerKind optimizer = OptimizerKind::PlainGradient;
  double eps_std = 1e-6;
  Aggregation aggregation = Aggregation::Sum;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

struct LossGradient {
  double loss = 0.0;
  PolicyParams gradient;
  double mean_abs_ratio_dev = 0.0;  // mean |r − 1| over tokens
  double clip_fraction = 0.0;       // tokens whose clipped branch is active
  std::size_t tokens = 0;
};

// Clipped group-relative surrogate (negated, so it is a loss) over clean or
// robust groups, plus kl_beta · KL(π_θ || reference). Robust groups of the
// same source bundle are averaged before the cross-question aggregation.
// Throws ContractViolation on a mixed-stream or adversary batch.
LossGradient grpo_surrogate(const PolicyParams& params, const PolicyParams& reference,
                            std::span<const RolloutGroup> groups, const UpdateConfig& cfg);

// REINFORCE on hint tokens with the effectiveness gap as a constant weight
// and 1/|h| length normalization.
LossGradient adversary_reinforce(const PolicyParams& params, std::span<const RolloutGroup> groups,
                                 const UpdateConfig& cfg);

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

// One descent step on the loss. Throws NonFiniteGradient on NaN/Inf.
PolicyParams apply_update(const PolicyParams& params, const PolicyParams& gradient,
                          const UpdateConfig& cfg, OptimizerState& state);

// Mean over contexts of the exact KL(old || new). Adversary contexts sum the
// per-position divergences (positions are independent).
double approx_kl(const PolicyParams& old_params, const PolicyParams& new_params,
                 std::span<const RoleContext> contexts);

struct UpdateReport {
  Stream stream = Stream::Clean;
  std::int64_t step = 0;  // optimizer step index after this update
  std::size_t groups = 0;
  std::size_t trajectories = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double mean_abs_ratio_dev = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double entropy = 0.0;  // mean policy entropy over the batch contexts, pre-update
};

// Loss, gradient and step for one stream's batch; mutates params in place.
UpdateReport run_stream_update(PolicyParams& params, const PolicyParams& reference, Stream stream,
                               std::span<const RolloutGroup> groups, const UpdateConfig& cfg,
                               OptimizerState& opt);

}  // namespace seirenes
