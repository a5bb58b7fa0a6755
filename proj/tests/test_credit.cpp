#include <cmath>
#include <random>

#include "doctest.h"
#include "seirenes/credit.hpp"
#include "seirenes/errors.hpp"
#include "support.hpp"

using namespace seirenes;

namespace {

Trajectory answer(double reward, QuestionId q = 0) {
  Trajectory t;
  t.context = RoleContext::clean(q);
  t.tokens = {0};
  t.behavior_logprobs = {0.0};
  t.reward = reward;
  return t;
}

// A bundle with the given reward patterns; hint tokens are arbitrary.
RolloutBundle bundle_from(const std::vector<double>& clean,
                          const std::vector<std::vector<double>>& hinted) {
  RolloutBundle b;
  b.question = {0, 4, 0, 0.5};
  for (double r : clean) b.clean.push_back(answer(r));
  for (std::size_t k = 0; k < hinted.size(); ++k) {
    Trajectory h;
    h.context = RoleContext::adversary(0);
    h.tokens = {static_cast<int>(k % 4), 0};
    h.behavior_logprobs = {0.0, 0.0};
    b.hints.push_back(h);
    std::vector<Trajectory> group;
    for (double r : hinted[k]) {
      auto t = answer(r);
      t.context = RoleContext::hinted(0, h.tokens);
      group.push_back(t);
    }
    b.hinted.push_back(group);
    double s = 0.0;
    for (double r : hinted[k]) s += r;
    b.p_hinted.push_back(s / static_cast<double>(hinted[k].size()));
  }
  double s = 0.0;
  for (double r : clean) s += r;
  b.p_clean = s / static_cast<double>(clean.size());
  b.collection_step = 4;
  return b;
}

}  // namespace

TEST_CASE("group advantages reference values") {
  const std::vector<double> r{1, 0, 0, 0};
  const auto a = group_advantages(r, 1e-6);
  CHECK(a[0] == doctest::Approx(1.7320).epsilon(1e-3));
  for (int i = 1; i < 4; ++i) CHECK(a[i] == doctest::Approx(-0.5773).epsilon(1e-3));

  const std::vector<double> same{0.5, 0.5, 0.5};
  for (double x : group_advantages(same)) CHECK(x == 0.0);

  const std::vector<double> ab{1, 0}, ba{0, 1};
  const auto x = group_advantages(ab), y = group_advantages(ba);
  CHECK(x[0] == -y[0]);
  CHECK(x[1] == -y[1]);
  CHECK_THROWS_AS(group_advantages(std::vector<double>{}), ContractViolation);
}

TEST_CASE("group advantages have zero mean on random groups") {
  std::mt19937_64 gen(31);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> r(2 + trial % 15);
    for (auto& v : r) v = coin(gen);
    double mean = 0.0;
    for (double v : group_advantages(r)) mean += v;
    CHECK(std::abs(mean / static_cast<double>(r.size())) < 1e-9);
  }
}

TEST_CASE("adversary reward is the bounded gap") {
  CHECK(adversary_reward(1.0, 0.0) == 1.0);
  CHECK(adversary_reward(0.75, 0.25) == 0.5);
  for (int i = 0; i <= 8; ++i) {
    const double g = adversary_reward(0.25, i / 8.0);
    CHECK(g >= -0.75);
    CHECK(g <= 0.25);
  }
  for (int i = 0; i <= 8; ++i) CHECK(adversary_reward(0.0, i / 8.0) <= 0.0);
  CHECK(adversary_reward(1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(adversary_reward(1.2, 0.0), ContractViolation);
  CHECK_THROWS_AS(adversary_reward(0.5, -0.1), ContractViolation);
}

TEST_CASE("candidate groups: one clean, one adversary, one robust per hint") {
  const auto b = bundle_from({1, 0, 1, 1, 0, 1, 1, 1},
                             {{1, 0, 0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1, 0, 1}});
  const auto groups = build_candidate_groups(b, 1e-6, 9);
  REQUIRE(groups.size() == 4);
  CHECK(groups[0].stream == Stream::Clean);
  CHECK(groups[1].stream == Stream::Adversary);
  CHECK(groups[2].stream == Stream::Robust);
  CHECK(groups[3].stream == Stream::Robust);
  for (const auto& g : groups) {
    CHECK(g.birth_step == 4);
    CHECK(g.bundle_serial == 9);
  }

  std::vector<double> clean_r;
  for (const auto& t : b.clean) clean_r.push_back(*t.reward);
  CHECK(groups[0].advantages == group_advantages(clean_r, 1e-6));

  // Each robust group is standardized over its own hint's answers.
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> r;
    for (const auto& t : b.hinted[k]) r.push_back(*t.reward);
    CHECK(groups[2 + k].advantages == group_advantages(r, 1e-6));
    CHECK(*groups[2 + k].hint_index == k);
  }

  const auto& adv = groups[1];
  REQUIRE(adv.trajectories.size() == 2);
  CHECK(adv.advantages[0] == doctest::Approx(0.75 - 0.125));
  CHECK(adv.advantages[1] == doctest::Approx(0.75 - 0.875));
  CHECK(*adv.trajectories[0].reward == adv.advantages[0]);
}

TEST_CASE("zero-advantage filter") {
  // Clean all correct, both hints at p = 1: everything filtered.
  auto groups = build_candidate_groups(bundle_from({1, 1, 1, 1}, {{1, 1}, {1, 1}}));
  CHECK(filter_zero_advantage(groups).empty());

  // Mixed clean survives; equal p_clean and p_hinted kills the adversary group.
  groups = build_candidate_groups(bundle_from({1, 0, 1, 0}, {{1, 0}, {0, 1}}));
  auto kept = filter_zero_advantage(groups);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].stream == Stream::Clean);
  CHECK(kept[1].stream == Stream::Robust);
  CHECK(kept[2].stream == Stream::Robust);

  // Only the hint with a nonzero gap is kept; the uniform hinted group goes.
  groups = build_candidate_groups(bundle_from({1, 0, 1, 0}, {{1, 0}, {0, 0}}));
  kept = filter_zero_advantage(groups);
  REQUIRE(kept.size() == 3);
  CHECK(kept[1].stream == Stream::Adversary);
  REQUIRE(kept[1].trajectories.size() == 1);
  CHECK(kept[1].advantages[0] == 0.5);
  CHECK(kept[2].stream == Stream::Robust);
  CHECK(*kept[2].hint_index == 0);

  // A question whose clean group is filtered still contributes the rest.
  groups = build_candidate_groups(bundle_from({1, 1, 1, 1}, {{1, 0}, {1, 1}}));
  kept = filter_zero_advantage(groups);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].stream == Stream::Adversary);
  CHECK(kept[1].stream == Stream::Robust);
}

TEST_CASE("filter is idempotent on random bundles") {
  std::mt19937_64 gen(12);
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> clean(8);
    for (auto& r : clean) r = coin(gen);
    std::vector<std::vector<double>> hinted(2, std::vector<double>(8));
    for (auto& g : hinted) {
      for (auto& r : g) r = coin(gen);
    }
    const auto once = filter_zero_advantage(build_candidate_groups(bundle_from(clean, hinted)));
    const auto twice = filter_zero_advantage(once);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i].stream == twice[i].stream);
      CHECK(once[i].advantages == twice[i].advantages);
    }
  }
}
