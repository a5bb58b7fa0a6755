#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "seirenes/cli.hpp"
#include "seirenes/errors.hpp"
#include "seirenes/policy.hpp"

using namespace seirenes;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("seirenes-test-" + name);
  fs::remove_all(dir);
  return dir;
}

cli::TrainOptions small_run(const fs::path& out) {
  cli::TrainOptions opts;
  opts.config.pool.n = 64;
  opts.config.pool.k = 8;
  opts.config.steps = 50;
  opts.config.seed = 1;
  opts.config.output = out.string();
  return opts;
}

// Value column of a `name value` table row.
std::string table_value(const std::string& table, const std::string& name) {
  std::istringstream in(table);
  std::string key, value;
  while (in >> key >> value) {
    if (key == name) return value;
  }
  return {};
}

}  // namespace

TEST_CASE("config: defaults, invalid values, unknown keys") {
  const auto cfg = config_from_json(nlohmann::json::object());
  CHECK(cfg.rollout.g2 == 2);
  CHECK(cfg.rollout.g1 == 8);
  CHECK(cfg.rollout.g3 == 8);
  CHECK(cfg.streams.m_adv == 256);
  CHECK(cfg.streams.max_lag == 3);
  CHECK(cfg.mastery.k_m == 1);
  CHECK(cfg.update.clip_low == 0.2);
  CHECK(cfg.update.clip_high == 0.28);

  const auto bad = nlohmann::json::parse(R"({"update": {"clip_high": -1}})");
  CHECK_THROWS_WITH_AS(config_from_json(bad), doctest::Contains("clip_high"), ConfigError);
  const auto unknown = nlohmann::json::parse(R"({"gpu": 1})");
  CHECK_THROWS_WITH_AS(config_from_json(unknown), doctest::Contains("gpu"), ConfigError);
  const auto nested = nlohmann::json::parse(R"({"rollout": {"g4": 1}})");
  CHECK_THROWS_WITH_AS(config_from_json(nested), doctest::Contains("rollout.g4"), ConfigError);
  const auto zero = nlohmann::json::parse(R"({"rollout": {"g1": 0}})");
  CHECK_THROWS_AS(config_from_json(zero), ConfigError);

  // The resolved config echoes back to an equivalent config.
  const auto echoed = config_from_json(nlohmann::json::parse(to_json(cfg).dump()));
  CHECK(to_json(echoed).dump() == to_json(cfg).dump());
  CHECK_THROWS_AS(load_config("/nonexistent/seirenes.json"), ConfigError);
}

TEST_CASE("train twice gives byte-identical metrics") {
  const auto a = scratch("train");
  std::ostringstream log;
  CHECK(cli::cmd_train(small_run(a), log) == cli::kOk);
  const auto ma = slurp(a / cli::kMetricsFile);
  const auto ckpt_a = slurp(a / cli::kCheckpointFile);
  const auto audit_a = slurp(a / cli::kAuditFile);
  CHECK_FALSE(ma.empty());
  CHECK(cli::cmd_train(small_run(a), log) == cli::kOk);
  CHECK(ma == slurp(a / cli::kMetricsFile));
  CHECK(ckpt_a == slurp(a / cli::kCheckpointFile));
  CHECK(audit_a == slurp(a / cli::kAuditFile));

  std::istringstream in(ma);
  const auto records = read_metrics(in);
  REQUIRE_FALSE(records.empty());
  CHECK(records.size() <= 50);
  CHECK(records.back().mastered_count <= 64);

  // The header carries the resolved config.
  const auto header = nlohmann::json::parse(ma.substr(0, ma.find('\n')));
  CHECK(header.at("format") == cli::kMetricsFormat);
  CHECK(header.at("config").at("rollout").at("g2") == 2);

  std::ifstream ckpt(a / cli::kCheckpointFile);
  const auto params = read_checkpoint(ckpt);
  CHECK(params.shape.questions == 64);

  // A parallel run writes the same records; only the echoed config differs.
  auto par = small_run(a);
  par.config.workers = 4;
  CHECK(cli::cmd_train(par, log) == cli::kOk);
  const auto mp = slurp(a / cli::kMetricsFile);
  CHECK(mp.substr(mp.find('\n')) == ma.substr(ma.find('\n')));

  std::ostringstream out, err;
  CHECK(cli::cmd_audit(a.string(), 8, 1, out, err) == cli::kOk);
  CHECK(nlohmann::json::parse(out.str()).at("n") == 8);
  CHECK(cli::cmd_audit(scratch("missing").string(), 8, 1, out, err) == cli::kFailure);
}

TEST_CASE("bundle dump writes one line per collected bundle") {
  const auto dir = scratch("dump");
  auto opts = small_run(dir);
  opts.config.steps = 2;
  opts.config.rollout.batch_size = 8;
  opts.config.mastery.enabled = false;
  opts.dump_bundles = true;
  std::ostringstream log;
  CHECK(cli::cmd_train(opts, log) == cli::kOk);
  std::ifstream in(dir / cli::kBundleFile);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("clean").size() == 8);
    CHECK(j.at("hints").size() == 2);
    ++lines;
  }
  CHECK(lines == 16);
}

TEST_CASE("sched: worked scenario, sweep, missing file") {
  std::ostringstream out, err;
  CHECK(cli::cmd_sched({}, out, err) == cli::kOk);
  CHECK(table_value(out.str(), "t_sequential") == "198");
  CHECK(table_value(out.str(), "t_merged") == "190");
  CHECK(table_value(out.str(), "t12") == "100");

  std::ostringstream csv;
  cli::SchedOptions sweep;
  sweep.sweep_ratios = {0.05, 0.1, 0.2, 0.5, 1.0};
  CHECK(cli::cmd_sched(sweep, csv, err) == cli::kOk);
  const auto text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);

  cli::SchedOptions missing;
  missing.scenario_path = "/nonexistent/scenario.json";
  CHECK(cli::cmd_sched(missing, out, err) != cli::kOk);

  const auto dir = scratch("sched");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"r1_lengths": [1], "gpus": 2})";
  cli::SchedOptions malformed;
  malformed.scenario_path = (dir / "bad.json").string();
  std::ostringstream err2;
  CHECK(cli::cmd_sched(malformed, out, err2) != cli::kOk);
  CHECK(err2.str().find("gpus") != std::string::npos);
}

TEST_CASE("replay regenerates identical tables from the metrics file") {
  const auto dir = scratch("replay");
  auto opts = small_run(dir);
  opts.config.steps = 30;
  std::ostringstream log;
  REQUIRE(cli::cmd_train(opts, log) == cli::kOk);
  const auto file = slurp(dir / cli::kMetricsFile);

  std::istringstream a(file), b(file);
  const auto first = cli::replay(a, "r");
  const auto second = cli::replay(b, "r");
  CHECK(first.text == second.text);
  CHECK(first.csv == second.csv);

  // Direct recomputation from the in-memory trace gives the same table.
  std::istringstream c(file);
  const auto trace = attack_trace(read_metrics(c));
  CHECK(summary_csv(summarize_attack(trace), "r") == first.csv);

  std::ostringstream out, err;
  CHECK(cli::cmd_replay((dir / cli::kMetricsFile).string(), true, out, err) == cli::kOk);
  CHECK(out.str() == summary_csv(first.summary, "seirenes-test-replay"));
  CHECK(cli::cmd_replay("/nonexistent/metrics.jsonl", false, out, err) != cli::kOk);
}
