#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "seirenes/rng.hpp"
#include "seirenes/tasks.hpp"

namespace seirenes {

enum class Role { CleanReasoner, Adversary, HintedReasoner };

const char* to_string(Role role);

// Which face of the shared policy is speaking, for which question, and
// (for the hinted reasoner only) under which hint.
struct RoleContext {
  Role role = Role::CleanReasoner;
  QuestionId question = 0;
  std::optional<HintTokens> hint;

  static RoleContext clean(QuestionId q) { return {Role::CleanReasoner, q, std::nullopt}; }
  static RoleContext adversary(QuestionId q) { return {Role::Adversary, q, std::nullopt}; }
  static RoleContext hinted(QuestionId q, HintTokens h) {
    return {Role::HintedReasoner, q, std::move(h)};
  }

  friend bool operator==(const RoleContext&, const RoleContext&) = default;
};

struct PolicyShape {
  std::size_t questions = 0;
  int answers = 0;         // K
  int hint_len = 2;        // H
  int strength_vocab = 3;  // S

  friend bool operator==(const PolicyShape&, const PolicyShape&) = default;
};

// Tabular role-conditioned logits. The same type doubles as the gradient
// container; `strength_scale` is a fixed feature map and is never trained.
//
//   clean[q][a]      clean reasoner logits
//   adv[q][p][tok]   adversary logits at hint position p (K tokens at p = 0,
//                    S tokens at p >= 1)
//   trust[q]         additive bonus on the suggested answer, scaled by
//                    strength_scale[strength_index]
struct PolicyParams {
  PolicyShape shape;
  std::vector<double> clean;
  std::vector<double> adv;
  std::vector<double> trust;
  std::vector<double> strength_scale;

  static PolicyParams zeros(const PolicyShape& shape, std::vector<double> strength_scale);
  // Same shape, all trainable entries zero, strength_scale copied.
  static PolicyParams zeros_like(const PolicyParams& other);

  int vocab(int position) const;
  std::size_t adv_stride() const;
  std::size_t adv_offset(int position) const;

  std::span<double> clean_row(QuestionId q);
  std::span<const double> clean_row(QuestionId q) const;
  std::span<double> adv_row(QuestionId q, int position);
  std::span<const double> adv_row(QuestionId q, int position) const;

  // The trainable tables, in a fixed order (clean, adv, trust).
  std::array<std::span<double>, 3> segments();
  std::array<std::span<const double>, 3> segments() const;
  std::size_t trainable_size() const { return clean.size() + adv.size() + trust.size(); }
  double& trainable(std::size_t i);
  double trainable(std::size_t i) const;

  bool all_finite() const;
  double l2_norm() const;
  void axpy(double a, const PolicyParams& x);  // this += a * x

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

// Starting point of training: clean[q][truth] = 2·difficulty − 1 and 0
// elsewhere, trust[q] = trust_init, uniform adversary.
PolicyParams initial_params(const TaskPool& pool, int hint_len,
                            std::vector<double> strength_scale = {0.5, 1.0, 1.5},
                            double trust_init = 1.5);

// A sampled rollout. Reasoner trajectories have one answer token; adversary
// trajectories have hint_len tokens. `reward` stays empty for adversary
// trajectories until credit assignment fills in the hint-effectiveness gap.
struct Trajectory {
  RoleContext context;
  std::vector<int> tokens;
  std::vector<double> behavior_logprobs;
  std::optional<double> reward;
  std::int64_t birth_step = 0;
};

// Next-token logits at the given position of the context's output.
std::vector<double> logits(const PolicyParams& params, const RoleContext& ctx, int position = 0);
std::vector<double> probabilities(const PolicyParams& params, const RoleContext& ctx,
                                  int position = 0);

// Number of output tokens the role emits.
int output_length(const PolicyParams& params, Role role);

std::vector<Trajectory> sample(const PolicyParams& params, const TaskPool& pool,
                               const RoleContext& ctx, std::size_t n, Rng& rng,
                               std::int64_t birth_step = 0);

std::vector<double> logprob(const PolicyParams& params, const RoleContext& ctx,
                            std::span<const int> tokens);

// Adds dL/dlogits at one output position into the parameter gradient.
void accumulate_logit_gradient(PolicyParams& grad, const PolicyParams& params,
                               const RoleContext& ctx, int position,
                               std::span<const double> dlogits);

struct WeightedItem {
  const RoleContext* context = nullptr;
  std::span<const int> tokens;
  double weight = 0.0;
};

// Gradient of Σ weight · (1/len) Σ_t log π(token_t | ctx).
PolicyParams weighted_logprob_gradient(const PolicyParams& params,
                                       std::span<const WeightedItem> items);

// Entropy in nats; the adversary entropy is averaged over hint positions.
double entropy(const PolicyParams& params, const RoleContext& ctx);

// Text checkpoint: header line, shape line, then one table per line with
// every value at 17 significant digits (bit-exact round trip).
void write_checkpoint(std::ostream& out, const PolicyParams& params);
PolicyParams read_checkpoint(std::istream& in);

}  // namespace seirenes
