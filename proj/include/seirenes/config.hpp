#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seirenes/bundle.hpp"
#include "seirenes/mastery.hpp"
#include "seirenes/update.hpp"

namespace seirenes {

struct PoolConfig {
  std::size_t n = 64;
  int k = 8;
  std::optional<std::uint64_t> seed;  // derived from the master seed when unset
};

struct RolloutConfig {
  std::size_t g1 = 8;
  std::size_t g2 = 2;
  std::size_t g3 = 8;
  int hint_len = 2;
  std::size_t batch_size = 256;
  std::vector<double> strength_scale = {0.5, 1.0, 1.5};
  double trust_init = 1.5;

  RolloutCounts counts() const { return {g1, g2, g3}; }
};

// Flush sizes count groups for the clean and robust streams and hint
// trajectories for the adversary stream.
struct StreamsConfig {
  std::size_t m_clean = 128;
  std::size_t m_adv = 256;
  std::size_t m_robust = 128;
  std::int64_t max_lag = 3;
  std::size_t capacity_factor = 4;
};

struct MasteryConfig {
  bool enabled = true;
  int k_m = 1;
  std::size_t audit_n = 8;
  MasteryCriterion criterion = MasteryCriterion::Robust;
  // Periodic audit with re-admission of questions whose audit accuracy falls
  // below readmit_below. Off unless audit_every > 0 and readmit is set.
  bool readmit = false;
  std::int64_t audit_every = 0;
  double readmit_below = 0.5;
};

struct RunConfig {
  PoolConfig pool;
  RolloutConfig rollout;
  UpdateConfig update;
  StreamsConfig streams;
  MasteryConfig mastery;
  std::int64_t steps = 500;
  std::uint64_t seed = 1;
  std::string output = "run";
  std::size_t workers = 1;  // 1 = serial; results are identical for any value
  // Stop training the adversary after this collection step.
  std::optional<std::int64_t> freeze_adversary_after;

  std::uint64_t pool_seed() const;
  // Throws ConfigError naming the first invalid key.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys and invalid values throw
// ConfigError with the dotted key path.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace seirenes
