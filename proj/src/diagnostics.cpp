#include "seirenes/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "seirenes/errors.hpp"
#include "seirenes/numerics.hpp"

namespace seirenes {

double attack_strength(double p1_bar, double p3_bar) { return (p1_bar - p3_bar) * 100.0; }

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::ordered_json to_json(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["p1_bar"] = m.p1_bar;
  j["p3_bar"] = m.p3_bar;
  j["delta_attack"] = m.delta_attack();
  nlohmann::ordered_json streams;
  for (Stream s : kStreamOrder) {
    const auto& sm = m.stream(s);
    nlohmann::ordered_json o;
    o["queue_len"] = sm.queue_len;
    o["flushed"] = sm.flushed;
    o["evicted"] = sm.evicted;
    o["loss"] = opt(sm.loss);
    o["grad_norm"] = opt(sm.grad_norm);
    o["clip_frac"] = opt(sm.clip_frac);
    o["approx_kl"] = opt(sm.approx_kl);
    o["entropy"] = sm.entropy;
    streams[to_string(s)] = std::move(o);
  }
  j["streams"] = std::move(streams);
  j["mastered_count"] = m.mastered_count;
  j["active_pool_size"] = m.active_pool_size;
  j["batch_size"] = m.batch_size;
  j["optimizer_step"] = m.optimizer_step;
  j["wall_ms"] = m.wall_ms;
  return j;
}

StepMetrics step_metrics_from_json(const nlohmann::json& j) {
  StepMetrics m;
  try {
    m.step = j.at("step").get<std::int64_t>();
    m.p1_bar = j.at("p1_bar").get<double>();
    m.p3_bar = j.at("p3_bar").get<double>();
    if (j.contains("streams")) {
      for (Stream s : kStreamOrder) {
        const auto& o = j.at("streams").at(to_string(s));
        auto& sm = m.stream(s);
        sm.queue_len = o.at("queue_len").get<std::size_t>();
        sm.flushed = o.at("flushed").get<bool>();
        sm.evicted = o.at("evicted").get<std::size_t>();
        sm.loss = opt_from(o, "loss");
        sm.grad_norm = opt_from(o, "grad_norm");
        sm.clip_frac = opt_from(o, "clip_frac");
        sm.approx_kl = opt_from(o, "approx_kl");
        sm.entropy = o.value("entropy", 0.0);
      }
    }
    m.mastered_count = j.value("mastered_count", std::size_t{0});
    m.active_pool_size = j.value("active_pool_size", std::size_t{0});
    m.batch_size = j.value("batch_size", std::size_t{0});
    m.optimizer_step = j.value("optimizer_step", std::int64_t{0});
    m.wall_ms = j.value("wall_ms", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("metrics record: ") + e.what());
  }
  return m;
}

std::vector<StepMetrics> read_metrics(std::istream& in) {
  std::vector<StepMetrics> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("metrics line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("step")) continue;
    out.push_back(step_metrics_from_json(j));
  }
  return out;
}

std::vector<double> attack_trace(std::span<const StepMetrics> metrics) {
  std::vector<double> trace;
  trace.reserve(metrics.size());
  for (const auto& m : metrics) trace.push_back(m.delta_attack());
  return trace;
}

double tail_frequency(std::span<const double> trace_pp, double threshold_pp) {
  if (trace_pp.empty()) throw ContractViolation("tail_frequency: empty trace");
  return static_cast<double>(strong_steps(trace_pp, threshold_pp)) /
         static_cast<double>(trace_pp.size());
}

std::size_t strong_steps(std::span<const double> trace_pp, double threshold_pp) {
  return static_cast<std::size_t>(std::count_if(
      trace_pp.begin(), trace_pp.end(), [&](double d) { return d > threshold_pp; }));
}

std::size_t longest_streak(std::span<const double> trace_pp, double threshold_pp) {
  if (trace_pp.empty()) throw ContractViolation("longest_streak: empty trace");
  std::size_t best = 0, run = 0;
  for (double d : trace_pp) {
    run = d > threshold_pp ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

SaturationSplit saturation_split(std::span<const double> trace_pp, double threshold_pp,
                                 std::size_t window) {
  const std::size_t n = trace_pp.size();
  if (n < 2) throw ContractViolation("saturation_split: trace needs at least two steps");
  if (window == 0) throw ContractViolation("saturation_split: window must be positive");
  window = std::min(window, n);

  std::vector<double> indicator(n);
  for (std::size_t i = 0; i < n; ++i) indicator[i] = trace_pp[i] > threshold_pp ? 100.0 : 0.0;

  SaturationSplit out;
  const std::size_t half = (n + 1) / 2;
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < n; ++i) (i < half ? early : late) += indicator[i];
  out.early = early / static_cast<double>(half) / 100.0;
  out.late = late / static_cast<double>(n - half) / 100.0;

  // Trailing moving average, defined from the first full window on.
  std::vector<double> xs, ys;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += indicator[i];
    if (i >= window) acc -= indicator[i - window];
    if (i + 1 >= window) {
      xs.push_back(static_cast<double>(i));
      ys.push_back(acc / static_cast<double>(window));
    }
  }
  if (xs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return out;
}

AttackSummary summarize_attack(std::span<const double> trace_pp,
                               std::span<const double> thresholds) {
  AttackSummary s;
  s.steps = trace_pp.size();
  s.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double t : thresholds) s.tail.push_back(tail_frequency(trace_pp, t));
  if (trace_pp.size() >= 2) s.saturation = saturation_split(trace_pp, kStrongAttackPp);
  s.longest_streak = longest_streak(trace_pp, kStrongAttackPp);
  s.total_strong = strong_steps(trace_pp, kStrongAttackPp);
  return s;
}

std::string summary_text(const AttackSummary& s, const std::string& run_name) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-12s", "run");
  out << buf;
  for (double t : s.thresholds) {
    char label[32];
    std::snprintf(label, sizeof label, "tail>%gpp%%", t);
    std::snprintf(buf, sizeof buf, "  %10s", label);
    out << buf;
  }
  out << "   early%    late%   slope%/step  streak  strong   steps\n";
  std::snprintf(buf, sizeof buf, "%-12s", run_name.c_str());
  out << buf;
  for (double f : s.tail) {
    std::snprintf(buf, sizeof buf, "  %10.1f", 100.0 * f);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "  %7.1f  %7.1f  %+12.4f  %6zu  %6zu  %6zu\n",
                100.0 * s.saturation.early, 100.0 * s.saturation.late, s.saturation.slope,
                s.longest_streak, s.total_strong, s.steps);
  out << buf;
  return out.str();
}

std::string summary_csv(const AttackSummary& s, const std::string& run_name) {
  std::ostringstream out;
  char buf[64];
  out << "run";
  for (double t : s.thresholds) {
    std::snprintf(buf, sizeof buf, ",tail_gt_%g", t);
    out << buf;
  }
  out << ",early,late,slope_pct_per_step,longest_streak,total_strong,steps\n";
  out << run_name;
  for (double f : s.tail) {
    std::snprintf(buf, sizeof buf, ",%.17g", f);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, ",%.17g", s.saturation.early);
  out << buf;
  std::snprintf(buf, sizeof buf, ",%.17g", s.saturation.late);
  out << buf;
  std::snprintf(buf, sizeof buf, ",%.17g", s.saturation.slope);
  out << buf;
  out << ',' << s.longest_streak << ',' << s.total_strong << ',' << s.steps << '\n';
  return out.str();
}

double hint_flip_rate(const PolicyParams& params, const TaskPool& pool, QuestionId q) {
  const auto& question = pool.at(q);
  const auto truth = static_cast<std::size_t>(question.truth);
  const double p_clean = probabilities(params, RoleContext::clean(q))[truth];
  if (p_clean <= 0.0) return 0.0;
  const auto suggest = probabilities(params, RoleContext::adversary(q), 0);
  std::vector<double> strength{1.0};
  if (params.shape.hint_len >= 2) strength = probabilities(params, RoleContext::adversary(q), 1);
  double flip = 0.0;
  for (std::size_t w = 0; w < suggest.size(); ++w) {
    for (std::size_t s = 0; s < strength.size(); ++s) {
      HintTokens hint{static_cast<int>(w)};
      if (params.shape.hint_len >= 2) hint.push_back(static_cast<int>(s));
      const double p_hint =
          probabilities(params, RoleContext::hinted(q, std::move(hint)))[truth];
      flip += suggest[w] * strength[s] * std::max(0.0, p_clean - p_hint);
    }
  }
  return flip / p_clean;
}

double hint_flip_rate(const PolicyParams& params, const TaskPool& pool) {
  double total = 0.0;
  for (const auto& q : pool.questions) total += hint_flip_rate(params, pool, q.id);
  return total / static_cast<double>(pool.size());
}

double expected_clean_success(const PolicyParams& params, const TaskPool& pool) {
  double total = 0.0;
  for (const auto& q : pool.questions) {
    total += probabilities(params, RoleContext::clean(q.id))[static_cast<std::size_t>(q.truth)];
  }
  return total / static_cast<double>(pool.size());
}

}  // namespace seirenes
