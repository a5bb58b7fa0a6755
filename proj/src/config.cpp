#include "seirenes/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "seirenes/errors.hpp"
#include "seirenes/rng.hpp"

namespace seirenes {

std::uint64_t RunConfig::pool_seed() const {
  return pool.seed ? *pool.seed : seed_for(seed, "pool");
}

void RunConfig::validate() const {
  if (pool.n < 1) throw ConfigError("pool.n: must be at least 1");
  if (pool.k < 2) throw ConfigError("pool.k: must be at least 2");
  if (rollout.g1 < 1) throw ConfigError("rollout.g1: must be at least 1");
  if (rollout.g2 < 1) throw ConfigError("rollout.g2: must be at least 1");
  if (rollout.g3 < 1) throw ConfigError("rollout.g3: must be at least 1");
  if (rollout.hint_len < 1) throw ConfigError("rollout.hint_len: must be at least 1");
  if (rollout.batch_size < 1) throw ConfigError("rollout.batch_size: must be at least 1");
  if (rollout.strength_scale.empty()) throw ConfigError("rollout.strength_scale: must be non-empty");
  for (double s : rollout.strength_scale) {
    if (!(s >= 0.0)) throw ConfigError("rollout.strength_scale: entries must be >= 0");
  }
  update.validate();
  if (streams.m_clean < 1) throw ConfigError("streams.m_clean: must be at least 1");
  if (streams.m_adv < 1) throw ConfigError("streams.m_adv: must be at least 1");
  if (streams.m_robust < 1) throw ConfigError("streams.m_robust: must be at least 1");
  if (streams.max_lag < 0) throw ConfigError("streams.max_lag: must be non-negative");
  if (streams.capacity_factor < 1) throw ConfigError("streams.capacity_factor: must be at least 1");
  if (mastery.k_m < 1) throw ConfigError("mastery.k_m: must be at least 1");
  if (mastery.audit_n < 1) throw ConfigError("mastery.audit_n: must be at least 1");
  if (mastery.audit_every < 0) throw ConfigError("mastery.audit_every: must be non-negative");
  if (steps < 1) throw ConfigError("steps: must be at least 1");
  if (workers < 1) throw ConfigError("workers: must be at least 1");
}

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::string& prefix,
                    std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(prefix + ": expected an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + (prefix.empty() ? key : prefix + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, const std::string& prefix, T& out) {
  if (!obj.contains(key)) return;
  const std::string path = prefix.empty() ? key : prefix + "." + key;
  try {
    const auto& v = obj.at(key);
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError(path + ": must be non-negative");
      }
    }
    out = v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  if (j.is_null()) return cfg;
  reject_unknown(j, "", {"pool", "rollout", "update", "streams", "mastery", "steps", "seed",
                         "output", "workers", "freeze_adversary_after"});
  if (j.contains("pool")) {
    const auto& o = j.at("pool");
    reject_unknown(o, "pool", {"n", "k", "seed"});
    read(o, "n", "pool", cfg.pool.n);
    read(o, "k", "pool", cfg.pool.k);
    if (o.contains("seed") && !o.at("seed").is_null()) {
      std::uint64_t s = 0;
      read(o, "seed", "pool", s);
      cfg.pool.seed = s;
    }
  }
  if (j.contains("rollout")) {
    const auto& o = j.at("rollout");
    reject_unknown(o, "rollout",
                   {"g1", "g2", "g3", "hint_len", "batch_size", "strength_scale", "trust_init"});
    read(o, "g1", "rollout", cfg.rollout.g1);
    read(o, "g2", "rollout", cfg.rollout.g2);
    read(o, "g3", "rollout", cfg.rollout.g3);
    read(o, "hint_len", "rollout", cfg.rollout.hint_len);
    read(o, "batch_size", "rollout", cfg.rollout.batch_size);
    read(o, "strength_scale", "rollout", cfg.rollout.strength_scale);
    read(o, "trust_init", "rollout", cfg.rollout.trust_init);
  }
  if (j.contains("update")) {
    const auto& o = j.at("update");
    reject_unknown(o, "update",
                   {"clip_low", "clip_high", "kl_beta", "lr", "optimizer", "eps_std",
                    "aggregation", "adam_beta1", "adam_beta2", "adam_eps", "weight_decay"});
    auto& u = cfg.update;
    read(o, "clip_low", "update", u.clip_low);
    read(o, "clip_high", "update", u.clip_high);
    read(o, "kl_beta", "update", u.kl_beta);
    read(o, "lr", "update", u.lr);
    read(o, "eps_std", "update", u.eps_std);
    read(o, "adam_beta1", "update", u.adam_beta1);
    read(o, "adam_beta2", "update", u.adam_beta2);
    read(o, "adam_eps", "update", u.adam_eps);
    read(o, "weight_decay", "update", u.weight_decay);
    if (o.contains("optimizer")) {
      std::string name;
      read(o, "optimizer", "update", name);
      if (name == "plain-gradient") {
        u.optimizer = OptimizerKind::PlainGradient;
      } else if (name == "adaptive-moment") {
        u.optimizer = OptimizerKind::AdaptiveMoment;
      } else {
        throw ConfigError("update.optimizer: expected plain-gradient or adaptive-moment");
      }
    }
    if (o.contains("aggregation")) {
      std::string name;
      read(o, "aggregation", "update", name);
      if (name == "sum") {
        u.aggregation = Aggregation::Sum;
      } else if (name == "mean") {
        u.aggregation = Aggregation::Mean;
      } else {
        throw ConfigError("update.aggregation: expected sum or mean");
      }
    }
  }
  if (j.contains("streams")) {
    const auto& o = j.at("streams");
    reject_unknown(o, "streams", {"m_clean", "m_adv", "m_robust", "max_lag", "capacity_factor"});
    read(o, "m_clean", "streams", cfg.streams.m_clean);
    read(o, "m_adv", "streams", cfg.streams.m_adv);
    read(o, "m_robust", "streams", cfg.streams.m_robust);
    read(o, "max_lag", "streams", cfg.streams.max_lag);
    read(o, "capacity_factor", "streams", cfg.streams.capacity_factor);
  }
  if (j.contains("mastery")) {
    const auto& o = j.at("mastery");
    reject_unknown(o, "mastery", {"enabled", "k_m", "audit_n", "criterion", "readmit",
                                  "audit_every", "readmit_below"});
    auto& m = cfg.mastery;
    read(o, "enabled", "mastery", m.enabled);
    read(o, "k_m", "mastery", m.k_m);
    read(o, "audit_n", "mastery", m.audit_n);
    read(o, "readmit", "mastery", m.readmit);
    read(o, "audit_every", "mastery", m.audit_every);
    read(o, "readmit_below", "mastery", m.readmit_below);
    if (o.contains("criterion")) {
      std::string name;
      read(o, "criterion", "mastery", name);
      if (name == "robust") {
        m.criterion = MasteryCriterion::Robust;
      } else if (name == "clean-only") {
        m.criterion = MasteryCriterion::CleanOnly;
      } else {
        throw ConfigError("mastery.criterion: expected robust or clean-only");
      }
    }
  }
  read(j, "steps", "", cfg.steps);
  read(j, "seed", "", cfg.seed);
  read(j, "output", "", cfg.output);
  read(j, "workers", "", cfg.workers);
  if (j.contains("freeze_adversary_after") && !j.at("freeze_adversary_after").is_null()) {
    std::int64_t f = 0;
    read(j, "freeze_adversary_after", "", f);
    cfg.freeze_adversary_after = f;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["pool"] = {{"n", cfg.pool.n}, {"k", cfg.pool.k}, {"seed", cfg.pool_seed()}};
  j["rollout"] = {{"g1", cfg.rollout.g1},
                  {"g2", cfg.rollout.g2},
                  {"g3", cfg.rollout.g3},
                  {"hint_len", cfg.rollout.hint_len},
                  {"batch_size", cfg.rollout.batch_size},
                  {"strength_scale", cfg.rollout.strength_scale},
                  {"trust_init", cfg.rollout.trust_init}};
  const auto& u = cfg.update;
  j["update"] = {
      {"clip_low", u.clip_low},
      {"clip_high", u.clip_high},
      {"kl_beta", u.kl_beta},
      {"lr", u.lr},
      {"optimizer",
       u.optimizer == OptimizerKind::PlainGradient ? "plain-gradient" : "adaptive-moment"},
      {"eps_std", u.eps_std},
      {"aggregation", u.aggregation == Aggregation::Sum ? "sum" : "mean"},
      {"adam_beta1", u.adam_beta1},
      {"adam_beta2", u.adam_beta2},
      {"adam_eps", u.adam_eps},
      {"weight_decay", u.weight_decay}};
  j["streams"] = {{"m_clean", cfg.streams.m_clean},
                  {"m_adv", cfg.streams.m_adv},
                  {"m_robust", cfg.streams.m_robust},
                  {"max_lag", cfg.streams.max_lag},
                  {"capacity_factor", cfg.streams.capacity_factor}};
  const auto& m = cfg.mastery;
  j["mastery"] = {{"enabled", m.enabled},
                  {"k_m", m.k_m},
                  {"audit_n", m.audit_n},
                  {"criterion", m.criterion == MasteryCriterion::Robust ? "robust" : "clean-only"},
                  {"readmit", m.readmit},
                  {"audit_every", m.audit_every},
                  {"readmit_below", m.readmit_below}};
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  j["workers"] = cfg.workers;
  j["freeze_adversary_after"] = cfg.freeze_adversary_after
                                    ? nlohmann::ordered_json(*cfg.freeze_adversary_after)
                                    : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace seirenes
