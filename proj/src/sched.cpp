#include "seirenes/sched.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

#include "seirenes/errors.hpp"

namespace seirenes::sched {

void Scenario::validate() const {
  if (capacity < 1) throw ContractViolation("scenario: capacity must be at least 1");
  if (verify_cost < 0) throw ContractViolation("scenario: verify_cost must be non-negative");
  const std::pair<const char*, const std::vector<std::int64_t>*> stages[] = {
      {"r1_lengths", &r1_lengths}, {"r2_lengths", &r2_lengths}, {"r3_lengths", &r3_lengths}};
  for (const auto& [name, lengths] : stages) {
    if (lengths->empty()) throw ContractViolation(std::string("scenario: ") + name + " is empty");
    for (auto len : *lengths) {
      if (len < 1) throw ContractViolation(std::string("scenario: ") + name + " has length < 1");
    }
  }
}

Timeline schedule(std::span<const std::int64_t> lengths, std::int64_t capacity) {
  if (capacity < 1) throw ContractViolation("schedule: capacity must be at least 1");
  Timeline tl;
  tl.start.resize(lengths.size());
  tl.finish.resize(lengths.size());
  // Finish times of occupied slots; a freed slot is refilled at that instant.
  std::priority_queue<std::int64_t, std::vector<std::int64_t>, std::greater<>> busy;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] < 1) throw ContractViolation("schedule: sequence length must be at least 1");
    std::int64_t t = 0;
    if (static_cast<std::int64_t>(busy.size()) >= capacity) {
      t = busy.top();
      busy.pop();
    }
    tl.start[i] = t;
    tl.finish[i] = t + lengths[i];
    busy.push(tl.finish[i]);
    tl.makespan = std::max(tl.makespan, tl.finish[i]);
  }
  return tl;
}

std::int64_t simulate_batch(std::span<const std::int64_t> lengths, std::int64_t capacity) {
  return schedule(lengths, capacity).makespan;
}

Result simulate_sequential(const Scenario& s) {
  s.validate();
  Result r;
  r.t_r1 = simulate_batch(s.r1_lengths, s.capacity);
  const auto t_r2 = simulate_batch(s.r2_lengths, s.capacity);
  const auto t_r3 = simulate_batch(s.r3_lengths, s.capacity);
  r.t_sequential = r.t_r1 + s.verify_cost + t_r2 + t_r3;
  return r;
}

Result simulate_merged(const Scenario& s) {
  Result r = simulate_sequential(s);
  std::vector<std::int64_t> joint = s.r1_lengths;
  joint.insert(joint.end(), s.r2_lengths.begin(), s.r2_lengths.end());
  const auto tl = schedule(joint, s.capacity);
  r.t12 = tl.makespan;

  std::int64_t r1_end = 0;
  for (std::size_t i = 0; i < s.r1_lengths.size(); ++i) r1_end = std::max(r1_end, tl.finish[i]);
  std::int64_t inside = 0, total = 0;
  for (std::size_t i = s.r1_lengths.size(); i < joint.size(); ++i) {
    total += joint[i];
    inside += std::max<std::int64_t>(0, std::min(tl.finish[i], r1_end) - tl.start[i]);
  }
  r.bubble_fill = total > 0 ? static_cast<double>(inside) / static_cast<double>(total) : 0.0;

  const auto t_r3 = simulate_batch(s.r3_lengths, s.capacity);
  r.t_merged = r.t12 + t_r3 + std::max<std::int64_t>(0, s.verify_cost - t_r3);
  return r;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
  static const char* known[] = {"r1_lengths", "r2_lengths", "r3_lengths", "capacity",
                                "verify_cost"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known)) {
      throw ConfigError("scenario: unknown key '" + key + "'");
    }
  }
  Scenario s;
  try {
    s.r1_lengths = j.at("r1_lengths").get<std::vector<std::int64_t>>();
    s.r2_lengths = j.at("r2_lengths").get<std::vector<std::int64_t>>();
    s.r3_lengths = j.at("r3_lengths").get<std::vector<std::int64_t>>();
    s.capacity = j.at("capacity").get<std::int64_t>();
    s.verify_cost = j.value("verify_cost", std::int64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  try {
    s.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  return s;
}

nlohmann::json to_json(const Scenario& s) {
  return {{"r1_lengths", s.r1_lengths},
          {"r2_lengths", s.r2_lengths},
          {"r3_lengths", s.r3_lengths},
          {"capacity", s.capacity},
          {"verify_cost", s.verify_cost}};
}

namespace {

double mean_of(const std::vector<std::int64_t>& v) {
  return static_cast<double>(std::accumulate(v.begin(), v.end(), std::int64_t{0})) /
         static_cast<double>(v.size());
}

}  // namespace

std::vector<SweepRow> sweep_r2_ratio(const Scenario& base, std::span<const double> ratios) {
  base.validate();
  const double r1_mean = mean_of(base.r1_lengths);
  const double r2_mean = mean_of(base.r2_lengths);
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    if (!(ratio > 0.0)) throw ConfigError("sweep: ratios must be positive");
    Scenario s = base;
    const double factor = ratio * r1_mean / r2_mean;
    for (auto& len : s.r2_lengths) {
      len = std::max<std::int64_t>(1, std::llround(static_cast<double>(len) * factor));
    }
    rows.push_back({ratio, simulate_merged(s)});
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "r2_r1_ratio,t_r1,t12,t_merged,t_sequential,bubble_fill\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%lld,%lld,%lld,%lld,%.6f\n", row.ratio,
                  static_cast<long long>(row.result.t_r1), static_cast<long long>(row.result.t12),
                  static_cast<long long>(row.result.t_merged),
                  static_cast<long long>(row.result.t_sequential), row.result.bubble_fill);
    out << buf;
  }
  return out.str();
}

std::string result_table(const Scenario& s, const Result& r) {
  std::ostringstream out;
  char buf[128];
  auto line = [&](const char* name, long long v) {
    std::snprintf(buf, sizeof buf, "%-14s %12lld\n", name, v);
    out << buf;
  };
  std::snprintf(buf, sizeof buf, "%-14s %12lld\n", "capacity", static_cast<long long>(s.capacity));
  out << buf;
  line("t_r1", r.t_r1);
  line("t12", r.t12);
  line("t_sequential", r.t_sequential);
  line("t_merged", r.t_merged);
  line("saved", r.t_sequential - r.t_merged);
  std::snprintf(buf, sizeof buf, "%-14s %12.4f\n", "bubble_fill", r.bubble_fill);
  out << buf;
  return out.str();
}

}  // namespace seirenes::sched
