#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "seirenes/diagnostics.hpp"
#include "seirenes/errors.hpp"
#include "support.hpp"

using namespace seirenes;
using seirenes::testing::make_pool;
using seirenes::testing::random_params;

namespace {

std::vector<double> random_trace(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> d(-5.0, 15.0);
  std::vector<double> t(n);
  for (auto& x : t) x = std::round(d(gen));
  return t;
}

// Checks every run [i, j) explicitly.
std::size_t brute_streak(const std::vector<double>& trace, double theta) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    for (std::size_t j = i; j < trace.size(); ++j) {
      bool all = true;
      for (std::size_t k = i; k <= j; ++k) all = all && trace[k] > theta;
      if (all) best = std::max(best, j - i + 1);
    }
  }
  return best;
}

StepMetrics sample_metrics(std::int64_t step) {
  StepMetrics m;
  m.step = step;
  m.p1_bar = 0.8125;
  m.p3_bar = 0.6875;
  m.stream(Stream::Robust).flushed = true;
  m.stream(Stream::Robust).loss = -0.125;
  m.stream(Stream::Robust).grad_norm = 1.0 / 3.0;
  m.stream(Stream::Robust).clip_frac = 0.0;
  m.stream(Stream::Robust).approx_kl = 1e-9;
  m.stream(Stream::Clean).queue_len = 7;
  m.stream(Stream::Adversary).evicted = 2;
  m.stream(Stream::Adversary).entropy = 1.5;
  m.mastered_count = 3;
  m.active_pool_size = 61;
  m.batch_size = 61;
  m.optimizer_step = 4;
  return m;
}

}  // namespace

TEST_CASE("attack strength in percentage points") {
  CHECK(attack_strength(0.8, 0.8) == 0.0);
  CHECK(attack_strength(0.9, 0.6) == doctest::Approx(30.0));
  StepMetrics m;
  m.p1_bar = 0.75;
  m.p3_bar = 0.5;
  CHECK(m.delta_attack() == 25.0);
}

TEST_CASE("tail frequency and streak examples") {
  const std::vector<double> zeros(10, 0.0), mixed{6, 2, 7, 1}, positive{0.1, 3, 9};
  CHECK(tail_frequency(zeros, 3.0) == 0.0);
  CHECK(tail_frequency(mixed, 5.0) == 0.5);
  CHECK(tail_frequency(positive, 0.0) == 1.0);
  // Exactly at the threshold is not strong.
  const std::vector<double> at{5.0};
  CHECK(tail_frequency(at, 5.0) == 0.0);

  const std::vector<double> s{6, 6, 2, 6};
  CHECK(longest_streak(s, 5.0) == 2);
  CHECK(longest_streak(zeros, 5.0) == 0);
  CHECK_THROWS_AS(tail_frequency(std::vector<double>{}, 5.0), ContractViolation);
}

TEST_CASE("tail frequency is monotone and streaks match a brute-force scan") {
  std::mt19937_64 gen(44);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto trace = random_trace(gen, 1 + gen() % 60);
    double prev = 2.0;
    for (double theta = -6.0; theta <= 16.0; theta += 0.5) {
      const double f = tail_frequency(trace, theta);
      CHECK(f <= prev);
      prev = f;
    }
    for (double theta : {0.0, 3.0, 5.0, 10.0}) {
      const auto streak = longest_streak(trace, theta);
      CHECK(streak == brute_streak(trace, theta));
      CHECK(streak <= strong_steps(trace, theta));
    }
  }
}

TEST_CASE("saturation split cases") {
  const std::vector<double> constant(50, 8.0);
  auto s = saturation_split(constant, 5.0);
  CHECK(s.early == s.late);
  CHECK(s.early == 1.0);
  CHECK(s.slope == 0.0);

  // Indicator off for the first half, on for the second: positive slope.
  std::vector<double> rising(100, 0.0);
  for (std::size_t i = 50; i < 100; ++i) rising[i] = 10.0;
  s = saturation_split(rising, 5.0);
  CHECK(s.early == 0.0);
  CHECK(s.late == 1.0);
  CHECK(s.slope > 0.0);

  std::vector<double> falling(rising.rbegin(), rising.rend());
  CHECK(saturation_split(falling, 5.0).slope < 0.0);

  // Window clamped to the trace length: one smoothed point, zero slope.
  const std::vector<double> short_trace{10, 0, 10};
  s = saturation_split(short_trace, 5.0);
  CHECK(s.early == 0.5);
  CHECK(s.late == 1.0);
  CHECK(s.slope == 0.0);
  CHECK_THROWS_AS(saturation_split(std::vector<double>{1.0}, 5.0), ContractViolation);
}

TEST_CASE("slope of a ramped indicator matches the closed form") {
  // The smoothed indicator of a trace that turns on at step 60 rises by
  // 100/21 %/step over 21 steps; OLS over the plateau-ramp-plateau shape is
  // checked against a direct fit computed here.
  std::vector<double> trace(120, 0.0);
  for (std::size_t i = 60; i < 120; ++i) trace[i] = 9.0;
  std::vector<double> xs, ys;
  for (std::size_t i = 20; i < 120; ++i) {
    double c = 0.0;
    for (std::size_t k = i - 20; k <= i; ++k) c += trace[k] > 5.0 ? 100.0 : 0.0;
    xs.push_back(static_cast<double>(i));
    ys.push_back(c / 21.0);
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxy += xs[i] * ys[i];
    sxx += xs[i] * xs[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(saturation_split(trace, 5.0).slope == doctest::Approx(slope).epsilon(1e-9));
}

TEST_CASE("metrics records round-trip through JSON") {
  const auto m = sample_metrics(12);
  const auto back = step_metrics_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(to_json(back).dump() == to_json(m).dump());
  CHECK(back.stream(Stream::Clean).loss == std::nullopt);
  CHECK(*back.stream(Stream::Robust).grad_norm == 1.0 / 3.0);

  std::stringstream file;
  file << R"({"format":"header"})" << '\n';
  for (int s = 1; s <= 3; ++s) file << to_json(sample_metrics(s)).dump() << '\n';
  const auto read = read_metrics(file);
  REQUIRE(read.size() == 3);
  CHECK(read[2].step == 3);
  CHECK(attack_trace(read)[0] == doctest::Approx(12.5));

  std::stringstream broken("{\"step\": 1,\n");
  CHECK_THROWS_AS(read_metrics(broken), ConfigError);
}

TEST_CASE("summary tables are pure functions of the trace") {
  std::mt19937_64 gen(9);
  const auto trace = random_trace(gen, 200);
  const auto a = summarize_attack(trace);
  const auto b = summarize_attack(trace);
  CHECK(summary_text(a, "x") == summary_text(b, "x"));
  CHECK(summary_csv(a, "x") == summary_csv(b, "x"));
  REQUIRE(a.tail.size() == 3);
  CHECK(a.tail[0] >= a.tail[1]);
  CHECK(a.tail[1] >= a.tail[2]);
  CHECK(a.total_strong == strong_steps(trace, 5.0));
}

TEST_CASE("exact clean success and flip rate") {
  const auto pool = make_pool({1, 3}, 4);
  auto p = PolicyParams::zeros({2, 4, 2, 3}, {0.5, 1.0, 1.5});
  CHECK(expected_clean_success(p, pool) == doctest::Approx(0.25));
  // Zero trust: hints cannot flip anything.
  CHECK(hint_flip_rate(p, pool) == 0.0);

  p.clean_row(0)[1] = 1e6;
  p.clean_row(1)[3] = 1e6;
  p.trust = {1.5, 1.5};
  CHECK(expected_clean_success(p, pool) == 1.0);
  CHECK(hint_flip_rate(p, pool) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("flip rate matches a sampled estimate") {
  const auto pool = make_pool({2}, 5);
  std::mt19937_64 gen(6);
  auto p = random_params({1, 5, 2, 3}, gen);
  p.trust[0] = 1.5;
  Rng rng(2);
  const auto truth = std::size_t{2};
  const double p_clean = probabilities(p, RoleContext::clean(0))[truth];
  double loss = 0.0;
  const std::size_t n = 40000;
  for (const auto& h : sample(p, pool, RoleContext::adversary(0), n, rng)) {
    const double ph = probabilities(p, RoleContext::hinted(0, h.tokens))[truth];
    loss += std::max(0.0, p_clean - ph);
  }
  const double estimate = loss / static_cast<double>(n) / p_clean;
  CHECK(std::abs(hint_flip_rate(p, pool) - estimate) < 0.01);
}
