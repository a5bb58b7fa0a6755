#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace seirenes {

// Stream splitting: every consumer derives its own engine from
// (master seed, purpose label, step, index) so adding a consumer never
// shifts the draws seen by another one.
//
//   seed_for(master, "pool")                  task pool generation
//   seed_for(master, "batch", step)           active-pool batch sampling
//   seed_for(master, "sampling", step, qid)   bundle rollouts for one question
//   seed_for(master, "audit", step)           periodic mastery audit
//   seed_for(master, "audit", step, 1)        end-of-run audit
std::uint64_t seed_for(std::uint64_t master, std::string_view purpose,
                       std::uint64_t step = 0, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Inverse-CDF draw from a normalized probability vector.
  std::size_t categorical(std::span<const double> probs);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace seirenes
