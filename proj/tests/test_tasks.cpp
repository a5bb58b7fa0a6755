#include <sstream>

#include "doctest.h"
#include "seirenes/errors.hpp"
#include "seirenes/rng.hpp"
#include "seirenes/tasks.hpp"

using namespace seirenes;

TEST_CASE("generate_pool shapes and ranges") {
  const auto pool = generate_pool(1, 2, 7);
  REQUIRE(pool.size() == 1);
  CHECK(pool.questions[0].id == 0);
  CHECK((pool.questions[0].truth == 0 || pool.questions[0].truth == 1));

  const auto big = generate_pool(500, 8, 11);
  for (std::size_t i = 0; i < big.size(); ++i) {
    const auto& q = big.questions[i];
    CHECK(q.id == i);
    CHECK(q.answer_space == 8);
    CHECK(q.truth >= 0);
    CHECK(q.truth < 8);
    CHECK(q.difficulty >= 0.0);
    CHECK(q.difficulty <= 1.0);
  }
}

TEST_CASE("generate_pool is a pure function of (n, k, seed)") {
  CHECK(generate_pool(64, 8, 3) == generate_pool(64, 8, 3));
  const auto a = generate_pool(64, 8, 3);
  const auto b = generate_pool(64, 8, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a.questions[i].truth != b.questions[i].truth;
  CHECK(differs);
}

TEST_CASE("generate_pool rejects degenerate sizes") {
  CHECK_THROWS_AS(generate_pool(0, 8, 1), ConfigError);
  CHECK_THROWS_AS(generate_pool(4, 1, 1), ConfigError);
}

TEST_CASE("truths are roughly uniform over the answer space") {
  const auto pool = generate_pool(8000, 4, 5);
  std::vector<int> counts(4, 0);
  for (const auto& q : pool.questions) ++counts[static_cast<std::size_t>(q.truth)];
  for (int c : counts) CHECK(std::abs(c - 2000) < 200);
}

TEST_CASE("verify is the exact-match indicator") {
  const Question q{0, 4, 3, 0.5};
  CHECK(verify(q, 3) == 1);
  CHECK(verify(q, 2) == 0);
  CHECK_THROWS_AS(verify(q, 4), ContractViolation);
  CHECK_THROWS_AS(verify(q, -1), ContractViolation);

  for (const auto& question : generate_pool(50, 6, 9).questions) {
    int total = 0;
    for (int a = 0; a < question.answer_space; ++a) total += verify(question, a);
    CHECK(total == 1);
  }
}

TEST_CASE("decode_hint reads suggestion and strength") {
  const Question q{0, 8, 1, 0.5};
  CHECK(decode_hint(q, std::vector<int>{5, 1}, 3) == DecodedHint{5, 1});
  CHECK(decode_hint(q, std::vector<int>{0}, 3) == DecodedHint{0, 0});
  CHECK(decode_hint(q, std::vector<int>{2, 2, 0}, 3) == DecodedHint{2, 2});
  CHECK_THROWS_AS(decode_hint(4, std::vector<int>{7, 0}, 3), MalformedHint);
  CHECK_THROWS_AS(decode_hint(q, std::vector<int>{1, 3}, 3), MalformedHint);
  CHECK_THROWS_AS(decode_hint(q, std::vector<int>{1, 0, 5}, 3), MalformedHint);
  CHECK_THROWS_AS(decode_hint(q, std::vector<int>{}, 3), MalformedHint);
}

TEST_CASE("pool text form round-trips exactly") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pool = generate_pool(37, 5, seed);
    std::stringstream ss;
    write_pool(ss, pool);
    const auto back = read_pool(ss);
    CHECK(back.questions == pool.questions);
  }
}

TEST_CASE("seed_for separates purposes, steps and indices") {
  CHECK(seed_for(1, "pool") == seed_for(1, "pool"));
  CHECK(seed_for(1, "pool") != seed_for(2, "pool"));
  CHECK(seed_for(1, "pool") != seed_for(1, "batch"));
  CHECK(seed_for(1, "sampling", 3, 4) != seed_for(1, "sampling", 4, 3));
  CHECK(seed_for(1, "sampling", 3, 4) != seed_for(1, "sampling", 3, 5));
}

TEST_CASE("Rng draws stay in range") {
  Rng rng(42);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
  const std::vector<double> probs{0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) CHECK(rng.categorical(probs) == 1);
}
