#include "seirenes/update.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "seirenes/errors.hpp"
#include "seirenes/numerics.hpp"

namespace seirenes {

void UpdateConfig::validate() const {
  if (!(clip_low > 0.0)) throw ConfigError("update.clip_low: must be positive");
  if (!(clip_high > 0.0)) throw ConfigError("update.clip_high: must be positive");
  if (!(kl_beta >= 0.0)) throw ConfigError("update.kl_beta: must be non-negative");
  if (!(lr > 0.0)) throw ConfigError("update.lr: must be positive");
  if (!(eps_std > 0.0)) throw ConfigError("update.eps_std: must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("update.adam_beta1: must be in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("update.adam_beta2: must be in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("update.adam_eps: must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("update.weight_decay: must be non-negative");
}

namespace {

// Maps each group to its aggregation unit and the weight its per-group
// objective carries in the flush loss.
std::vector<double> group_weights(std::span<const RolloutGroup> groups, Aggregation agg) {
  std::vector<double> w(groups.size(), 0.0);
  if (groups.empty()) return w;
  std::map<std::uint64_t, std::size_t> unit_size;
  const bool robust = groups.front().stream == Stream::Robust;
  if (robust) {
    for (const auto& g : groups) ++unit_size[g.bundle_serial];
  }
  const double units = robust ? static_cast<double>(unit_size.size())
                              : static_cast<double>(groups.size());
  const double outer = agg == Aggregation::Mean ? 1.0 / units : 1.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double inner =
        robust ? 1.0 / static_cast<double>(unit_size[groups[i].bundle_serial]) : 1.0;
    w[i] = outer * inner;
  }
  return w;
}

}  // namespace

LossGradient grpo_surrogate(const PolicyParams& params, const PolicyParams& reference,
                            std::span<const RolloutGroup> groups, const UpdateConfig& cfg) {
  LossGradient out{0.0, PolicyParams::zeros_like(params), 0.0, 0.0, 0};
  if (groups.empty()) return out;
  const Stream stream = groups.front().stream;
  if (stream == Stream::Adversary) {
    throw ContractViolation("grpo_surrogate: adversary groups use adversary_reinforce");
  }
  for (const auto& g : groups) {
    if (g.stream != stream) throw ContractViolation("grpo_surrogate: mixed-stream batch");
    if (g.advantages.size() != g.trajectories.size()) {
      throw ContractViolation("grpo_surrogate: advantages missing");
    }
  }

  const auto weights = group_weights(groups, cfg.aggregation);
  const double lo = 1.0 - cfg.clip_low;
  const double hi = 1.0 + cfg.clip_high;
  double objective = 0.0;
  double ratio_dev = 0.0;
  std::size_t clipped = 0;
  std::vector<double> d;

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const double per_traj = weights[gi] / static_cast<double>(g.trajectories.size());
    for (std::size_t i = 0; i < g.trajectories.size(); ++i) {
      const auto& traj = g.trajectories[i];
      const double adv = g.advantages[i];
      const auto len = traj.tokens.size();
      if (traj.behavior_logprobs.size() != len || len == 0) {
        throw ContractViolation("grpo_surrogate: behavior logprobs missing");
      }
      const double per_tok = per_traj / static_cast<double>(len);
      for (std::size_t t = 0; t < len; ++t) {
        const int pos = static_cast<int>(t);
        const auto lp = log_softmax(logits(params, traj.context, pos));
        const auto tok = static_cast<std::size_t>(traj.tokens[t]);
        const double ratio = std::exp(lp[tok] - traj.behavior_logprobs[t]);
        ratio_dev += std::abs(ratio - 1.0);
        ++out.tokens;
        const double clipped_ratio = std::clamp(ratio, lo, hi);
        const bool clip_active = (adv > 0.0 && ratio > hi) || (adv < 0.0 && ratio < lo);
        if (clip_active) ++clipped;
        objective += per_tok * std::min(ratio * adv, clipped_ratio * adv);
        if (clip_active || adv == 0.0) continue;
        // d(-r·A)/dz = -A·r·(onehot − softmax)
        const double scale = -per_tok * adv * ratio;
        d.assign(lp.size(), 0.0);
        for (std::size_t a = 0; a < lp.size(); ++a) d[a] = -scale * std::exp(lp[a]);
        d[tok] += scale;
        accumulate_logit_gradient(out.gradient, params, traj.context, pos, d);
      }
    }
  }
  out.loss = -objective;

  if (cfg.kl_beta > 0.0) {
    if (reference.shape != params.shape) throw ContractViolation("reference shape mismatch");
    double kl_total = 0.0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const auto& ctx = groups[gi].trajectories.front().context;
      const auto lp = log_softmax(logits(params, ctx, 0));
      const auto lr = log_softmax(logits(reference, ctx, 0));
      double kl = 0.0;
      for (std::size_t a = 0; a < lp.size(); ++a) kl += std::exp(lp[a]) * (lp[a] - lr[a]);
      kl_total += weights[gi] * kl;
      // dKL/dz_k = p_k (log p_k − log r_k − KL)
      d.assign(lp.size(), 0.0);
      for (std::size_t a = 0; a < lp.size(); ++a) {
        d[a] = cfg.kl_beta * weights[gi] * std::exp(lp[a]) * (lp[a] - lr[a] - kl);
      }
      accumulate_logit_gradient(out.gradient, params, ctx, 0, d);
    }
    out.loss += cfg.kl_beta * kl_total;
  }

  if (out.tokens > 0) {
    out.mean_abs_ratio_dev = ratio_dev / static_cast<double>(out.tokens);
    out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(out.tokens);
  }
  return out;
}

LossGradient adversary_reinforce(const PolicyParams& params, std::span<const RolloutGroup> groups,
                                 const UpdateConfig& cfg) {
  LossGradient out{0.0, PolicyParams::zeros_like(params), 0.0, 0.0, 0};
  if (groups.empty()) return out;
  std::size_t total = 0;
  for (const auto& g : groups) {
    if (g.stream != Stream::Adversary) {
      throw ContractViolation("adversary_reinforce: non-adversary group in batch");
    }
    total += g.trajectories.size();
  }
  if (total == 0) return out;

  std::vector<WeightedItem> items;
  items.reserve(total);
  double objective = 0.0;
  double ratio_dev = 0.0;
  for (const auto& g : groups) {
    const double w = cfg.aggregation == Aggregation::Mean
                         ? 1.0 / static_cast<double>(total)
                         : 1.0 / static_cast<double>(g.trajectories.size());
    for (const auto& traj : g.trajectories) {
      if (!traj.reward.has_value()) {
        throw ContractViolation("adversary_reinforce: hint trajectory without a reward");
      }
      const double gap = *traj.reward;
      const auto lp = logprob(params, traj.context, traj.tokens);
      double mean_lp = 0.0;
      for (std::size_t t = 0; t < lp.size(); ++t) {
        mean_lp += lp[t];
        if (t < traj.behavior_logprobs.size()) {
          ratio_dev += std::abs(std::exp(lp[t] - traj.behavior_logprobs[t]) - 1.0);
        }
        ++out.tokens;
      }
      mean_lp /= static_cast<double>(lp.size());
      objective += w * gap * mean_lp;
      items.push_back({&traj.context, traj.tokens, -w * gap});
    }
  }
  out.loss = -objective;
  out.gradient = weighted_logprob_gradient(params, items);
  if (out.tokens > 0) out.mean_abs_ratio_dev = ratio_dev / static_cast<double>(out.tokens);
  return out;
}

PolicyParams apply_update(const PolicyParams& params, const PolicyParams& gradient,
                          const UpdateConfig& cfg, OptimizerState& state) {
  if (gradient.shape != params.shape) throw ContractViolation("apply_update: shape mismatch");
  const std::size_t n = params.trainable_size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(gradient.trainable(i))) {
      throw NonFiniteGradient("non-finite gradient at trainable coordinate " + std::to_string(i) +
                              " (value " + std::to_string(gradient.trainable(i)) + ")");
    }
  }
  PolicyParams next = params;
  if (cfg.optimizer == OptimizerKind::PlainGradient) {
    for (std::size_t i = 0; i < n; ++i) next.trainable(i) -= cfg.lr * gradient.trainable(i);
  } else {
    if (state.m.size() != n) {
      state.m.assign(n, 0.0);
      state.v.assign(n, 0.0);
      state.t = 0;
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < n; ++i) {
      const double g = gradient.trainable(i);
      state.m[i] = cfg.adam_beta1 * state.m[i] + (1.0 - cfg.adam_beta1) * g;
      state.v[i] = cfg.adam_beta2 * state.v[i] + (1.0 - cfg.adam_beta2) * g * g;
      const double mhat = state.m[i] / bc1;
      const double vhat = state.v[i] / bc2;
      double& theta = next.trainable(i);
      theta -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) + cfg.weight_decay * theta);
    }
  }
  if (!next.all_finite()) throw NonFiniteGradient("update produced non-finite parameters");
  return next;
}

double approx_kl(const PolicyParams& old_params, const PolicyParams& new_params,
                 std::span<const RoleContext> contexts) {
  if (contexts.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ctx : contexts) {
    const int len = output_length(old_params, ctx.role);
    for (int p = 0; p < len; ++p) {
      total += kl_from_logits(logits(old_params, ctx, p), logits(new_params, ctx, p));
    }
  }
  return total / static_cast<double>(contexts.size());
}

UpdateReport run_stream_update(PolicyParams& params, const PolicyParams& reference, Stream stream,
                               std::span<const RolloutGroup> groups, const UpdateConfig& cfg,
                               OptimizerState& opt) {
  UpdateReport report;
  report.stream = stream;
  report.groups = groups.size();
  std::vector<RoleContext> contexts;
  for (const auto& g : groups) {
    report.trajectories += g.trajectories.size();
    if (!g.trajectories.empty()) contexts.push_back(g.trajectories.front().context);
  }
  double h = 0.0;
  for (const auto& ctx : contexts) h += entropy(params, ctx);
  report.entropy = contexts.empty() ? 0.0 : h / static_cast<double>(contexts.size());

  auto lg = stream == Stream::Adversary ? adversary_reinforce(params, groups, cfg)
                                        : grpo_surrogate(params, reference, groups, cfg);
  report.loss = lg.loss;
  report.grad_norm = lg.gradient.l2_norm();
  report.mean_abs_ratio_dev = lg.mean_abs_ratio_dev;
  report.clip_fraction = lg.clip_fraction;

  auto next = apply_update(params, lg.gradient, cfg, opt);
  report.approx_kl = approx_kl(params, next, contexts);
  params = std::move(next);
  return report;
}

}  // namespace seirenes
