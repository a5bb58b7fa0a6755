#include "seirenes/tasks.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "seirenes/errors.hpp"
#include "seirenes/rng.hpp"

namespace seirenes {

const Question& TaskPool::at(QuestionId id) const {
  if (id >= questions.size()) {
    throw ContractViolation("question id " + std::to_string(id) + " outside pool of " +
                            std::to_string(questions.size()));
  }
  return questions[id];
}

TaskPool generate_pool(std::size_t n, int k, std::uint64_t seed) {
  if (n == 0) throw ConfigError("pool.n: must be at least 1");
  if (k < 2) throw ConfigError("pool.k: answer space must be at least 2");
  TaskPool pool;
  pool.seed = seed;
  pool.questions.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Question q;
    q.id = static_cast<QuestionId>(i);
    q.answer_space = k;
    q.truth = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    q.difficulty = rng.uniform();
    pool.questions.push_back(q);
  }
  return pool;
}

int verify(const Question& q, int answer) {
  if (answer < 0 || answer >= q.answer_space) {
    throw ContractViolation("verify: answer " + std::to_string(answer) +
                            " outside [0, " + std::to_string(q.answer_space) + ")");
  }
  return answer == q.truth ? 1 : 0;
}

DecodedHint decode_hint(const Question& q, std::span<const int> hint, int strength_vocab) {
  return decode_hint(q.answer_space, hint, strength_vocab);
}

DecodedHint decode_hint(int answer_space, std::span<const int> hint, int strength_vocab) {
  if (hint.empty()) throw MalformedHint("hint must contain at least one token");
  if (hint[0] < 0 || hint[0] >= answer_space) {
    throw MalformedHint("hint token 0 = " + std::to_string(hint[0]) +
                        " outside answer space " + std::to_string(answer_space));
  }
  for (std::size_t t = 1; t < hint.size(); ++t) {
    if (hint[t] < 0 || hint[t] >= strength_vocab) {
      throw MalformedHint("hint token " + std::to_string(t) + " = " + std::to_string(hint[t]) +
                          " outside strength vocabulary " + std::to_string(strength_vocab));
    }
  }
  return {hint[0], hint.size() >= 2 ? hint[1] : 0};
}

void write_pool(std::ostream& out, const TaskPool& pool) {
  char buf[64];
  for (const auto& q : pool.questions) {
    std::snprintf(buf, sizeof buf, "%.17g", q.difficulty);
    out << q.id << ' ' << q.truth << ' ' << q.answer_space << ' ' << buf << '\n';
  }
}

TaskPool read_pool(std::istream& in) {
  TaskPool pool;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Question q;
    std::string diff;
    if (!(ls >> q.id >> q.truth >> q.answer_space >> diff)) {
      throw ConfigError("pool line " + std::to_string(lineno) + ": expected 4 fields");
    }
    q.difficulty = std::stod(diff);
    if (q.id != pool.questions.size()) {
      throw ConfigError("pool line " + std::to_string(lineno) + ": ids must be 0..N-1 in order");
    }
    if (q.answer_space < 2 || q.truth < 0 || q.truth >= q.answer_space || q.difficulty < 0.0 ||
        q.difficulty > 1.0) {
      throw ConfigError("pool line " + std::to_string(lineno) + ": field out of range");
    }
    pool.questions.push_back(q);
  }
  return pool;
}

}  // namespace seirenes
