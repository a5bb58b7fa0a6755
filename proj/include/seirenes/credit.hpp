#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seirenes/bundle.hpp"

namespace seirenes {

enum class Stream { Clean = 0, Adversary = 1, Robust = 2 };

inline constexpr std::size_t kStreamCount = 3;
inline constexpr Stream kStreamOrder[kStreamCount] = {Stream::Clean, Stream::Adversary,
                                                      Stream::Robust};
const char* to_string(Stream stream);

// The unit queued for updates. Clean and robust groups carry standardized
// rewards as advantages; adversary groups carry each hint's effectiveness
// gap. `bundle_serial` identifies the source bundle so the robust loss can
// average hints of the same question before averaging across questions.
struct RolloutGroup {
  Stream stream = Stream::Clean;
  QuestionId question = 0;
  std::optional<std::size_t> hint_index;
  std::vector<Trajectory> trajectories;
  std::vector<double> advantages;
  std::int64_t birth_step = 0;
  std::uint64_t bundle_serial = 0;
  std::uint64_t arrival = 0;  // assigned by the queue on enqueue
};

inline constexpr double kDefaultStdEps = 1e-6;
inline constexpr double kAdversaryGapTolerance = 1e-9;

// (R_i − mean) / (population std + eps).
std::vector<double> group_advantages(std::span<const double> rewards, double eps = kDefaultStdEps);

// Hint-effectiveness gap p_clean − p_hinted.
double adversary_reward(double p_clean, double p_hinted);

// One clean group, one adversary group holding all hints, one robust group
// per hint (advantages standardized within that hint's answers only).
std::vector<RolloutGroup> build_candidate_groups(const RolloutBundle& bundle,
                                                 double eps = kDefaultStdEps,
                                                 std::uint64_t bundle_serial = 0);

// Drops zero-signal data: clean/robust groups with uniform rewards, adversary
// hints with |gap| < 1e-9 (and the adversary group once empty).
std::vector<RolloutGroup> filter_zero_advantage(std::vector<RolloutGroup> groups);

}  // namespace seirenes
