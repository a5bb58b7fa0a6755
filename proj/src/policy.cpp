#include "seirenes/policy.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "seirenes/errors.hpp"
#include "seirenes/numerics.hpp"

namespace seirenes {

const char* to_string(Role role) {
  switch (role) {
    case Role::CleanReasoner: return "clean-reasoner";
    case Role::Adversary: return "adversary";
    case Role::HintedReasoner: return "hinted-reasoner";
  }
  return "?";
}

PolicyParams PolicyParams::zeros(const PolicyShape& shape, std::vector<double> strength_scale) {
  if (shape.questions == 0 || shape.answers < 2 || shape.hint_len < 1 ||
      shape.strength_vocab < 1) {
    throw ContractViolation("PolicyParams: degenerate shape");
  }
  if (strength_scale.size() != static_cast<std::size_t>(shape.strength_vocab)) {
    throw ContractViolation("PolicyParams: strength_scale size must equal strength vocabulary");
  }
  PolicyParams p;
  p.shape = shape;
  p.clean.assign(shape.questions * static_cast<std::size_t>(shape.answers), 0.0);
  p.adv.assign(shape.questions * p.adv_stride(), 0.0);
  p.trust.assign(shape.questions, 0.0);
  p.strength_scale = std::move(strength_scale);
  return p;
}

PolicyParams PolicyParams::zeros_like(const PolicyParams& other) {
  return zeros(other.shape, other.strength_scale);
}

int PolicyParams::vocab(int position) const {
  return position == 0 ? shape.answers : shape.strength_vocab;
}

std::size_t PolicyParams::adv_stride() const {
  return static_cast<std::size_t>(shape.answers) +
         static_cast<std::size_t>(shape.hint_len - 1) * static_cast<std::size_t>(shape.strength_vocab);
}

std::size_t PolicyParams::adv_offset(int position) const {
  if (position == 0) return 0;
  return static_cast<std::size_t>(shape.answers) +
         static_cast<std::size_t>(position - 1) * static_cast<std::size_t>(shape.strength_vocab);
}

namespace {

void check_question(const PolicyShape& shape, QuestionId q) {
  if (q >= shape.questions) {
    throw ContractViolation("question " + std::to_string(q) + " outside policy shape (" +
                            std::to_string(shape.questions) + " questions)");
  }
}

void check_position(const PolicyShape& shape, int position) {
  if (position < 0 || position >= shape.hint_len) {
    throw ContractViolation("hint position " + std::to_string(position) + " outside [0, " +
                            std::to_string(shape.hint_len) + ")");
  }
}

}  // namespace

std::span<double> PolicyParams::clean_row(QuestionId q) {
  check_question(shape, q);
  return {clean.data() + q * static_cast<std::size_t>(shape.answers),
          static_cast<std::size_t>(shape.answers)};
}

std::span<const double> PolicyParams::clean_row(QuestionId q) const {
  check_question(shape, q);
  return {clean.data() + q * static_cast<std::size_t>(shape.answers),
          static_cast<std::size_t>(shape.answers)};
}

std::span<double> PolicyParams::adv_row(QuestionId q, int position) {
  check_question(shape, q);
  check_position(shape, position);
  return {adv.data() + q * adv_stride() + adv_offset(position),
          static_cast<std::size_t>(vocab(position))};
}

std::span<const double> PolicyParams::adv_row(QuestionId q, int position) const {
  check_question(shape, q);
  check_position(shape, position);
  return {adv.data() + q * adv_stride() + adv_offset(position),
          static_cast<std::size_t>(vocab(position))};
}

std::array<std::span<double>, 3> PolicyParams::segments() {
  return {std::span<double>(clean), std::span<double>(adv), std::span<double>(trust)};
}

std::array<std::span<const double>, 3> PolicyParams::segments() const {
  return {std::span<const double>(clean), std::span<const double>(adv),
          std::span<const double>(trust)};
}

double& PolicyParams::trainable(std::size_t i) {
  if (i < clean.size()) return clean[i];
  i -= clean.size();
  if (i < adv.size()) return adv[i];
  i -= adv.size();
  if (i < trust.size()) return trust[i];
  throw ContractViolation("trainable index out of range");
}

double PolicyParams::trainable(std::size_t i) const {
  return const_cast<PolicyParams*>(this)->trainable(i);
}

bool PolicyParams::all_finite() const {
  for (auto seg : segments()) {
    for (double v : seg) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double PolicyParams::l2_norm() const {
  double s = 0.0;
  for (auto seg : segments()) {
    for (double v : seg) s += v * v;
  }
  return std::sqrt(s);
}

void PolicyParams::axpy(double a, const PolicyParams& x) {
  if (x.shape != shape) throw ContractViolation("axpy: shape mismatch");
  auto dst = segments();
  auto src = x.segments();
  for (std::size_t s = 0; s < dst.size(); ++s) {
    for (std::size_t i = 0; i < dst[s].size(); ++i) dst[s][i] += a * src[s][i];
  }
}

PolicyParams initial_params(const TaskPool& pool, int hint_len, std::vector<double> strength_scale,
                            double trust_init) {
  if (pool.questions.empty()) throw ContractViolation("initial_params: empty pool");
  PolicyShape shape;
  shape.questions = pool.size();
  shape.answers = pool.questions.front().answer_space;
  shape.hint_len = hint_len;
  shape.strength_vocab = static_cast<int>(strength_scale.size());
  auto params = PolicyParams::zeros(shape, std::move(strength_scale));
  for (const auto& q : pool.questions) {
    if (q.answer_space != shape.answers) {
      throw ContractViolation("initial_params: pool mixes answer-space sizes");
    }
    params.clean_row(q.id)[static_cast<std::size_t>(q.truth)] = 2.0 * q.difficulty - 1.0;
    params.trust[q.id] = trust_init;
  }
  return params;
}

namespace {

void check_context(const PolicyParams& params, const RoleContext& ctx) {
  check_question(params.shape, ctx.question);
  const bool wants_hint = ctx.role == Role::HintedReasoner;
  if (wants_hint != ctx.hint.has_value()) {
    throw ContractViolation("RoleContext: hint must be present iff role is hinted-reasoner");
  }
}

}  // namespace

int output_length(const PolicyParams& params, Role role) {
  return role == Role::Adversary ? params.shape.hint_len : 1;
}

std::vector<double> logits(const PolicyParams& params, const RoleContext& ctx, int position) {
  check_context(params, ctx);
  switch (ctx.role) {
    case Role::CleanReasoner: {
      if (position != 0) throw ContractViolation("reasoner answers have a single position");
      auto row = params.clean_row(ctx.question);
      return {row.begin(), row.end()};
    }
    case Role::Adversary: {
      auto row = params.adv_row(ctx.question, position);
      return {row.begin(), row.end()};
    }
    case Role::HintedReasoner: {
      if (position != 0) throw ContractViolation("reasoner answers have a single position");
      auto row = params.clean_row(ctx.question);
      std::vector<double> out(row.begin(), row.end());
      const auto hint = decode_hint(params.shape.answers, *ctx.hint, params.shape.strength_vocab);
      out[static_cast<std::size_t>(hint.suggested)] +=
          params.trust[ctx.question] *
          params.strength_scale[static_cast<std::size_t>(hint.strength_index)];
      return out;
    }
  }
  throw ContractViolation("unknown role");
}

std::vector<double> probabilities(const PolicyParams& params, const RoleContext& ctx,
                                  int position) {
  return softmax(logits(params, ctx, position));
}

std::vector<Trajectory> sample(const PolicyParams& params, const TaskPool& pool,
                               const RoleContext& ctx, std::size_t n, Rng& rng,
                               std::int64_t birth_step) {
  if (n == 0) throw ContractViolation("sample: n must be at least 1");
  check_context(params, ctx);
  const int len = output_length(params, ctx.role);

  std::vector<std::vector<double>> logp(static_cast<std::size_t>(len));
  std::vector<std::vector<double>> probs(static_cast<std::size_t>(len));
  for (int p = 0; p < len; ++p) {
    logp[p] = log_softmax(logits(params, ctx, p));
    probs[p] = logp[p];
    for (double& v : probs[p]) v = std::exp(v);
  }

  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Trajectory traj;
    traj.context = ctx;
    traj.birth_step = birth_step;
    for (int p = 0; p < len; ++p) {
      const auto tok = rng.categorical(probs[p]);
      traj.tokens.push_back(static_cast<int>(tok));
      traj.behavior_logprobs.push_back(logp[p][tok]);
    }
    if (ctx.role != Role::Adversary) {
      traj.reward = verify(pool.at(ctx.question), traj.tokens.front());
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<double> logprob(const PolicyParams& params, const RoleContext& ctx,
                            std::span<const int> tokens) {
  const int len = output_length(params, ctx.role);
  if (static_cast<int>(tokens.size()) != len) {
    throw ContractViolation("logprob: expected " + std::to_string(len) + " tokens for role " +
                            to_string(ctx.role));
  }
  std::vector<double> out;
  out.reserve(tokens.size());
  for (int p = 0; p < len; ++p) {
    const auto lp = log_softmax(logits(params, ctx, p));
    if (tokens[p] < 0 || tokens[p] >= static_cast<int>(lp.size())) {
      throw ContractViolation("logprob: token " + std::to_string(tokens[p]) +
                              " outside vocabulary at position " + std::to_string(p));
    }
    out.push_back(lp[static_cast<std::size_t>(tokens[p])]);
  }
  return out;
}

void accumulate_logit_gradient(PolicyParams& grad, const PolicyParams& params,
                               const RoleContext& ctx, int position,
                               std::span<const double> dlogits) {
  if (grad.shape != params.shape) throw ContractViolation("gradient shape mismatch");
  check_context(params, ctx);
  switch (ctx.role) {
    case Role::CleanReasoner: {
      auto row = grad.clean_row(ctx.question);
      for (std::size_t a = 0; a < row.size(); ++a) row[a] += dlogits[a];
      return;
    }
    case Role::Adversary: {
      auto row = grad.adv_row(ctx.question, position);
      for (std::size_t t = 0; t < row.size(); ++t) row[t] += dlogits[t];
      return;
    }
    case Role::HintedReasoner: {
      auto row = grad.clean_row(ctx.question);
      for (std::size_t a = 0; a < row.size(); ++a) row[a] += dlogits[a];
      const auto hint = decode_hint(params.shape.answers, *ctx.hint, params.shape.strength_vocab);
      grad.trust[ctx.question] +=
          params.strength_scale[static_cast<std::size_t>(hint.strength_index)] *
          dlogits[static_cast<std::size_t>(hint.suggested)];
      return;
    }
  }
}

PolicyParams weighted_logprob_gradient(const PolicyParams& params,
                                       std::span<const WeightedItem> items) {
  auto grad = PolicyParams::zeros_like(params);
  std::vector<double> d;
  for (const auto& item : items) {
    if (!std::isfinite(item.weight)) throw ContractViolation("non-finite weight");
    if (item.weight == 0.0) continue;
    const auto& ctx = *item.context;
    const int len = output_length(params, ctx.role);
    if (static_cast<int>(item.tokens.size()) != len) {
      throw ContractViolation("weighted_logprob_gradient: wrong token count");
    }
    const double w = item.weight / static_cast<double>(len);
    for (int p = 0; p < len; ++p) {
      const auto probs = probabilities(params, ctx, p);
      d.assign(probs.size(), 0.0);
      for (std::size_t a = 0; a < probs.size(); ++a) d[a] = -w * probs[a];
      d[static_cast<std::size_t>(item.tokens[p])] += w;
      accumulate_logit_gradient(grad, params, ctx, p, d);
    }
  }
  return grad;
}

double entropy(const PolicyParams& params, const RoleContext& ctx) {
  const int len = output_length(params, ctx.role);
  double h = 0.0;
  for (int p = 0; p < len; ++p) h += entropy_of(probabilities(params, ctx, p));
  return h / static_cast<double>(len);
}

namespace {

constexpr const char* kCheckpointMagic = "seirenes-policy";
constexpr int kCheckpointVersion = 1;

void write_row(std::ostream& out, const char* name, std::span<const double> values) {
  char buf[64];
  out << name << ' ' << values.size();
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ' ' << buf;
  }
  out << '\n';
}

std::vector<double> read_row(std::istream& in, const std::string& expected) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("checkpoint: missing table '" + expected + "'");
  std::istringstream ls(line);
  std::string name;
  std::size_t count = 0;
  if (!(ls >> name >> count) || name != expected) {
    throw ConfigError("checkpoint: expected table '" + expected + "'");
  }
  std::vector<double> values;
  values.reserve(count);
  std::string tok;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(ls >> tok)) throw ConfigError("checkpoint: table '" + expected + "' truncated");
    values.push_back(std::stod(tok));
  }
  return values;
}

}  // namespace

void write_checkpoint(std::ostream& out, const PolicyParams& params) {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "shape " << params.shape.questions << ' ' << params.shape.answers << ' '
      << params.shape.hint_len << ' ' << params.shape.strength_vocab << '\n';
  write_row(out, "strength_scale", params.strength_scale);
  write_row(out, "clean", params.clean);
  write_row(out, "adv", params.adv);
  write_row(out, "trust", params.trust);
}

PolicyParams read_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) {
    throw ConfigError("checkpoint: bad header");
  }
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  }
  std::string tag;
  PolicyShape shape;
  if (!(in >> tag >> shape.questions >> shape.answers >> shape.hint_len >> shape.strength_vocab) ||
      tag != "shape") {
    throw ConfigError("checkpoint: bad shape line");
  }
  in.ignore(1, '\n');
  auto scale = read_row(in, "strength_scale");
  auto params = PolicyParams::zeros(shape, std::move(scale));
  auto clean = read_row(in, "clean");
  auto adv = read_row(in, "adv");
  auto trust = read_row(in, "trust");
  if (clean.size() != params.clean.size() || adv.size() != params.adv.size() ||
      trust.size() != params.trust.size()) {
    throw ConfigError("checkpoint: table sizes disagree with shape");
  }
  params.clean = std::move(clean);
  params.adv = std::move(adv);
  params.trust = std::move(trust);
  return params;
}

}  // namespace seirenes
