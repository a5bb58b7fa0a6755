#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace seirenes {

using QuestionId = std::uint32_t;

// A synthetic verifiable task: pick the single correct answer out of
// `answer_space` candidates. `difficulty` only shapes the initial policy.
struct Question {
  QuestionId id = 0;
  int answer_space = 2;
  int truth = 0;
  double difficulty = 0.0;

  friend bool operator==(const Question&, const Question&) = default;
};

struct TaskPool {
  std::vector<Question> questions;
  std::uint64_t seed = 0;

  std::size_t size() const { return questions.size(); }
  const Question& at(QuestionId id) const;

  friend bool operator==(const TaskPool&, const TaskPool&) = default;
};

// n questions, truths uniform on [0, k), difficulties uniform on [0, 1].
// Throws ConfigError for n == 0 or k < 2.
TaskPool generate_pool(std::size_t n, int k, std::uint64_t seed);

// Binary verifier reward. Throws ContractViolation on an out-of-range answer.
int verify(const Question& q, int answer);

// Hints are token sequences: token 0 names a suggested answer, token 1 a
// confidence level in [0, strength_vocab). Later tokens carry no meaning
// but count toward the hint length.
using HintTokens = std::vector<int>;

struct DecodedHint {
  int suggested = 0;
  int strength_index = 0;

  friend bool operator==(const DecodedHint&, const DecodedHint&) = default;
};

// Throws MalformedHint when a token falls outside its vocabulary.
DecodedHint decode_hint(const Question& q, std::span<const int> hint, int strength_vocab);
DecodedHint decode_hint(int answer_space, std::span<const int> hint, int strength_vocab);

// Line format: `id truth answer_space difficulty`, difficulty printed with
// 17 significant digits so the text form round-trips exactly.
void write_pool(std::ostream& out, const TaskPool& pool);
TaskPool read_pool(std::istream& in);

}  // namespace seirenes
