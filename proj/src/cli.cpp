#include "seirenes/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "seirenes/errors.hpp"
#include "seirenes/orchestrator.hpp"
#include "seirenes/rng.hpp"
#include "seirenes/sched.hpp"

namespace seirenes::cli {

namespace fs = std::filesystem;

nlohmann::ordered_json metrics_header(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["format"] = kMetricsFormat;
  j["config"] = to_json(config);
  return j;
}

namespace {

nlohmann::ordered_json trajectory_json(const Trajectory& t) {
  nlohmann::ordered_json j;
  j["tokens"] = t.tokens;
  j["reward"] = t.reward ? nlohmann::ordered_json(*t.reward) : nlohmann::ordered_json(nullptr);
  return j;
}

// Writes via a temporary so an interrupted write never clobbers the last
// good file.
void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string checkpoint_text(const PolicyParams& params) {
  std::ostringstream out;
  write_checkpoint(out, params);
  return out.str();
}

nlohmann::ordered_json mastery_json(const TrainerState& state) {
  nlohmann::ordered_json mastered = nlohmann::ordered_json::array();
  for (QuestionId q : state.mastery.mastered()) {
    mastered.push_back({{"question", q}, {"retired_at", *state.mastery.retired_at(q)}});
  }
  const auto& r = state.config.rollout;
  // Costs in rollouts: R1 is g1 answers, each R3 group g3 answers.
  const auto est = savings_estimate(state.mastery, static_cast<double>(r.g1),
                                    static_cast<double>(r.g3), r.g2, state.collection_step);
  nlohmann::ordered_json j;
  j["pool_size"] = state.mastery.pool_size();
  j["k_m"] = state.mastery.k_m();
  j["criterion"] =
      state.config.mastery.criterion == MasteryCriterion::Robust ? "robust" : "clean-only";
  j["mastered_count"] = state.mastery.mastered_count();
  j["mastered"] = std::move(mastered);
  j["savings"] = {{"per_step_cost_rollouts", est.per_step_cost},
                  {"cumulative_fraction", est.cumulative_fraction},
                  {"cumulative_saved_rollouts", est.cumulative_saved}};
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const RolloutBundle& bundle, std::int64_t collection_step) {
  nlohmann::ordered_json j;
  j["collection_step"] = collection_step;
  j["question"] = bundle.question.id;
  j["truth"] = bundle.question.truth;
  auto clean = nlohmann::ordered_json::array();
  for (const auto& t : bundle.clean) clean.push_back(trajectory_json(t));
  j["clean"] = std::move(clean);
  auto hints = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < bundle.hints.size(); ++k) {
    auto answers = nlohmann::ordered_json::array();
    for (const auto& t : bundle.hinted[k]) answers.push_back(trajectory_json(t));
    hints.push_back({{"tokens", bundle.hints[k].tokens},
                     {"p_hinted", bundle.p_hinted[k]},
                     {"answers", std::move(answers)}});
  }
  j["hints"] = std::move(hints);
  j["p_clean"] = bundle.p_clean;
  return j;
}

int cmd_train(const TrainOptions& opts, std::ostream& log) {
  const auto& cfg = opts.config;
  const fs::path dir(cfg.output);
  fs::create_directories(dir);

  auto state = make_trainer(cfg);
  {
    std::ofstream pool_out(dir / kPoolFile);
    write_pool(pool_out, state.pool);
  }
  write_atomically(dir / kCheckpointFile, checkpoint_text(state.params));

  std::ofstream metrics(dir / kMetricsFile, std::ios::binary | std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write " + (dir / kMetricsFile).string());
  metrics << metrics_header(cfg).dump() << '\n';

  std::ofstream bundles;
  if (opts.dump_bundles) {
    bundles.open(dir / kBundleFile, std::ios::binary | std::ios::trunc);
    state.bundle_sink = [&](const RolloutBundle& b) {
      bundles << to_json(b, state.collection_step).dump() << '\n';
    };
  }

  int status = kOk;
  RunResult result;
  try {
    for (std::int64_t i = 0; i < cfg.steps; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        train_step(state);
      } catch (const TrainingComplete&) {
        result.completed_pool = true;
        break;
      }
      ++result.steps_run;
      auto& m = state.metrics.back();
      if (opts.timing) {
        m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
      }
      metrics << to_json(m).dump() << '\n';
    }
  } catch (const NonFiniteGradient& e) {
    log << "aborted at collection step " << state.collection_step << ": " << e.what() << '\n';
    status = kAborted;
  }
  metrics.flush();

  // apply_update throws before assigning, so state.params is the last good policy.
  write_atomically(dir / kCheckpointFile, checkpoint_text(state.params));
  write_atomically(dir / kMasteryFile, mastery_json(state).dump(2) + "\n");
  Rng audit_rng(seed_for(cfg.seed, "audit", static_cast<std::uint64_t>(state.collection_step),
                         /*index=*/1));
  const auto report = audit(state.mastery, state.params, state.pool, cfg.mastery.audit_n, audit_rng);
  write_atomically(dir / kAuditFile, to_json(report).dump(2) + "\n");

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "steps %lld%s  optimizer steps %lld  mastered %zu/%zu  clean success %.4f  "
                "flip rate %.4f\n",
                static_cast<long long>(result.steps_run),
                result.completed_pool ? " (pool exhausted)" : "",
                static_cast<long long>(state.step), state.mastery.mastered_count(),
                state.pool.size(), expected_clean_success(state.params, state.pool),
                hint_flip_rate(state.params, state.pool));
  log << buf;
  return status;
}

int cmd_audit(const std::string& run_dir, std::size_t n, std::uint64_t seed, std::ostream& out,
              std::ostream& err) {
  const fs::path dir(run_dir);
  std::ifstream ckpt(dir / kCheckpointFile), pool_in(dir / kPoolFile), mastery_in(dir / kMasteryFile);
  if (!ckpt || !pool_in || !mastery_in) {
    err << "audit: " << run_dir << " is missing " << kCheckpointFile << ", " << kPoolFile
        << " or " << kMasteryFile << '\n';
    return kFailure;
  }
  const auto params = read_checkpoint(ckpt);
  const auto pool = read_pool(pool_in);
  nlohmann::json mj;
  try {
    mastery_in >> mj;
  } catch (const nlohmann::json::exception& e) {
    err << "audit: malformed " << kMasteryFile << ": " << e.what() << '\n';
    return kFailure;
  }
  MasteryTracker tracker(pool.size(), 1);
  for (const auto& e : mj.at("mastered")) {
    tracker.observe(e.at("question").get<QuestionId>(), 1, e.at("retired_at").get<std::int64_t>());
  }
  Rng rng(seed_for(seed, "audit"));
  out << to_json(audit(tracker, params, pool, n, rng)).dump(2) << '\n';
  return kOk;
}

int cmd_sched(const SchedOptions& opts, std::ostream& out, std::ostream& err) {
  sched::Scenario scenario;
  if (opts.scenario_path) {
    std::ifstream in(*opts.scenario_path);
    if (!in) {
      err << "sched: cannot open scenario '" << *opts.scenario_path << "'\n";
      return kFailure;
    }
    try {
      scenario = sched::scenario_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      err << "sched: malformed scenario: " << e.what() << '\n';
      return kFailure;
    } catch (const ConfigError& e) {
      err << "sched: invalid scenario: " << e.what() << '\n';
      return kFailure;
    }
  } else {
    scenario.r1_lengths = {100, 60};
    scenario.r2_lengths = {8, 8};
    scenario.r3_lengths = {90};
    scenario.capacity = 2;
  }
  if (opts.sweep_ratios.empty()) {
    auto merged = sched::simulate_merged(scenario);
    merged.t_sequential = sched::simulate_sequential(scenario).t_sequential;
    out << sched::result_table(scenario, merged);
  } else {
    const auto rows = sched::sweep_r2_ratio(scenario, opts.sweep_ratios);
    out << sched::sweep_csv(rows);
  }
  return kOk;
}

ReplayOutput replay(std::istream& metrics, const std::string& run_name) {
  ReplayOutput r;
  r.metrics = read_metrics(metrics);
  const auto trace = attack_trace(r.metrics);
  if (trace.size() < 2) throw ContractViolation("replay: need at least two step records");
  r.summary = summarize_attack(trace);
  r.text = summary_text(r.summary, run_name);
  r.csv = summary_csv(r.summary, run_name);
  return r;
}

int cmd_replay(const std::string& metrics_path, bool csv, std::ostream& out, std::ostream& err) {
  std::ifstream in(metrics_path);
  if (!in) {
    err << "replay: cannot open '" << metrics_path << "'\n";
    return kFailure;
  }
  const fs::path p(metrics_path);
  const std::string name =
      p.has_parent_path() ? p.parent_path().filename().string() : p.stem().string();
  const auto r = replay(in, name.empty() ? "run" : name);
  out << (csv ? r.csv : r.text);
  return kOk;
}

}  // namespace seirenes::cli
