#include "seirenes/orchestrator.hpp"

#include <algorithm>
#include <thread>

#include "seirenes/errors.hpp"
#include "seirenes/rng.hpp"

namespace seirenes {

StreamQueue::StreamQueue(Stream stream, std::size_t flush_size, std::size_t capacity,
                         std::int64_t max_lag)
    : stream_(stream), flush_size_(flush_size), capacity_(capacity), max_lag_(max_lag) {
  if (flush_size == 0) throw ContractViolation("StreamQueue: flush size must be positive");
  if (capacity < flush_size) throw ContractViolation("StreamQueue: capacity below flush size");
}

std::size_t StreamQueue::units_of(const RolloutGroup& g) const {
  return stream_ == Stream::Adversary ? g.trajectories.size() : 1;
}

EnqueueResult StreamQueue::enqueue(std::vector<RolloutGroup>& groups, std::int64_t current_step) {
  EnqueueResult result;
  std::size_t i = 0;
  for (; i < groups.size(); ++i) {
    auto& g = groups[i];
    if (g.stream != stream_) {
      throw ContractViolation(std::string("enqueue: ") + to_string(g.stream) + " group offered to " +
                              to_string(stream_) + " queue");
    }
    const auto u = units_of(g);
    if (units_ + u > capacity_) {
      result.backpressure = true;
      break;
    }
    g.arrival = next_arrival_++;
    if (record_) events_.push_back({QueueEvent::Kind::Enqueue, g.arrival, current_step});
    units_ += u;
    pending_.push_back(std::move(g));
    ++produced_;
    ++result.accepted;
  }
  groups.erase(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(i));
  return result;
}

std::size_t StreamQueue::evict_stale(std::int64_t current_step) {
  std::size_t n = 0;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (current_step - it->birth_step > max_lag_) {
      if (record_) events_.push_back({QueueEvent::Kind::Evict, it->arrival, current_step});
      units_ -= units_of(*it);
      it = pending_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  evicted_ += n;
  return n;
}

std::vector<RolloutGroup> StreamQueue::take_oldest(std::size_t units, std::int64_t current_step) {
  std::vector<RolloutGroup> out;
  std::size_t taken = 0;
  while (taken < units && !pending_.empty()) {
    auto& g = pending_.front();
    const auto u = units_of(g);
    taken += u;
    units_ -= u;
    max_consumed_lag_ = std::max(max_consumed_lag_, current_step - g.birth_step);
    if (record_) events_.push_back({QueueEvent::Kind::Consume, g.arrival, current_step});
    out.push_back(std::move(g));
    pending_.pop_front();
  }
  consumed_ += out.size();
  return out;
}

namespace {

std::array<StreamQueue, kStreamCount> make_queues(const StreamsConfig& s) {
  return {StreamQueue(Stream::Clean, s.m_clean, s.m_clean * s.capacity_factor, s.max_lag),
          StreamQueue(Stream::Adversary, s.m_adv, s.m_adv * s.capacity_factor, s.max_lag),
          StreamQueue(Stream::Robust, s.m_robust, s.m_robust * s.capacity_factor, s.max_lag)};
}

}  // namespace

TrainerState make_trainer(const RunConfig& config) {
  config.validate();
  auto pool = generate_pool(config.pool.n, config.pool.k, config.pool_seed());
  auto params = initial_params(pool, config.rollout.hint_len, config.rollout.strength_scale,
                               config.rollout.trust_init);
  return TrainerState{config,
                      pool,
                      params,
                      params,
                      {},
                      make_queues(config.streams),
                      0,
                      {},
                      0,
                      0,
                      MasteryTracker(pool.size(), config.mastery.k_m),
                      {},
                      {},
                      {}};
}

namespace {

bool adversary_frozen(const TrainerState& state) {
  const auto& f = state.config.freeze_adversary_after;
  return f.has_value() && state.collection_step > *f;
}

std::vector<RolloutBundle> collect_bundles(const TrainerState& state,
                                           std::span<const QuestionId> ids) {
  std::vector<RolloutBundle> bundles(ids.size());
  const auto counts = state.config.rollout.counts();
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(seed_for(state.config.seed, "sampling",
                       static_cast<std::uint64_t>(state.collection_step), ids[i]));
      bundles[i] = collect_bundle(state.params, state.pool, ids[i], counts, rng, state.step);
    }
  };
  const std::size_t workers = std::min(state.config.workers, ids.size());
  if (workers <= 1) {
    work(0, ids.size());
    return bundles;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (ids.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(ids.size(), b + chunk);
    if (b < e) threads.emplace_back(work, b, e);
  }
  for (auto& t : threads) t.join();
  return bundles;
}

}  // namespace

CollectResult collect_step(TrainerState& state, std::span<const QuestionId> batch) {
  if (batch.empty()) throw TrainingComplete();
  std::vector<QuestionId> ids(batch.begin(), batch.end());
  std::sort(ids.begin(), ids.end());

  CollectResult result;
  for (Stream s : kStreamOrder) {
    result.suspended[static_cast<std::size_t>(s)] = state.queue(s).room() == 0;
  }
  const bool frozen = adversary_frozen(state);

  auto bundles = collect_bundles(state, ids);

  double p1 = 0.0, p3 = 0.0;
  std::size_t hinted_groups = 0;
  std::array<double, kStreamCount> h{};
  for (auto& bundle : bundles) {
    const QuestionId q = bundle.question.id;
    if (state.bundle_sink) state.bundle_sink(bundle);
    p1 += bundle.p_clean;
    for (double p : bundle.p_hinted) p3 += p;
    hinted_groups += bundle.p_hinted.size();

    h[0] += entropy(state.params, RoleContext::clean(q));
    h[1] += entropy(state.params, RoleContext::adversary(q));
    double hinted_h = 0.0;
    for (const auto& hint : bundle.hints) {
      hinted_h += entropy(state.params, RoleContext::hinted(q, hint.tokens));
    }
    h[2] += hinted_h / static_cast<double>(bundle.hints.size());

    auto groups = filter_zero_advantage(build_candidate_groups(
        bundle, state.config.update.eps_std, state.next_bundle_serial++));

    std::vector<double> surviving_rates;
    for (const auto& g : groups) {
      if (g.stream == Stream::Robust) surviving_rates.push_back(bundle.p_hinted[*g.hint_index]);
    }

    for (auto& g : groups) {
      if (g.stream == Stream::Adversary && frozen) continue;
      if (state.extra_filter && state.extra_filter(g, state.collection_step)) continue;
      result.groups[static_cast<std::size_t>(g.stream)].push_back(std::move(g));
    }

    if (state.config.mastery.enabled) {
      const int indicator =
          state.config.mastery.criterion == MasteryCriterion::Robust
              ? mastery_indicator(bundle.p_clean, surviving_rates)
              : mastery_indicator(bundle.p_clean, {});
      if (state.mastery.observe(q, indicator, state.collection_step)) ++result.retired;
    }
  }
  result.p1_bar = p1 / static_cast<double>(bundles.size());
  result.p3_bar = hinted_groups > 0 ? p3 / static_cast<double>(hinted_groups) : 0.0;
  for (std::size_t s = 0; s < kStreamCount; ++s) {
    result.entropy[s] = h[s] / static_cast<double>(bundles.size());
  }
  for (Stream s : kStreamOrder) {
    if (result.suspended[static_cast<std::size_t>(s)]) {
      result.groups[static_cast<std::size_t>(s)].clear();
    }
  }
  return result;
}

std::optional<UpdateReport> maybe_flush(TrainerState& state, Stream stream) {
  auto& q = state.queue(stream);
  if (q.units() < q.flush_size()) return std::nullopt;
  q.evict_stale(state.step);
  if (q.units() < q.flush_size()) return std::nullopt;
  auto batch = q.take_oldest(q.flush_size(), state.step);
  auto report = run_stream_update(state.params, state.reference, stream, batch,
                                  state.config.update, state.optimizer);
  ++state.step;
  ++state.stream_steps[static_cast<std::size_t>(stream)];
  report.step = state.step;
  return report;
}

const StepMetrics& train_step(TrainerState& state) {
  ++state.collection_step;
  Rng batch_rng(seed_for(state.config.seed, "batch",
                         static_cast<std::uint64_t>(state.collection_step)));
  std::vector<QuestionId> batch;
  try {
    batch = sample_active(state.mastery, state.config.rollout.batch_size, batch_rng);
  } catch (const TrainingComplete&) {
    --state.collection_step;
    throw;
  }

  auto collected = collect_step(state, batch);

  StepMetrics m;
  m.step = state.collection_step;
  m.p1_bar = collected.p1_bar;
  m.p3_bar = collected.p3_bar;
  m.batch_size = batch.size();

  for (Stream s : kStreamOrder) {
    const auto idx = static_cast<std::size_t>(s);
    state.queue(s).enqueue(collected.groups[idx], state.step);
  }
  for (Stream s : kStreamOrder) {
    const auto idx = static_cast<std::size_t>(s);
    auto& sm = m.streams[idx];
    const auto evicted_before = state.queue(s).evicted();
    if (auto report = maybe_flush(state, s)) {
      sm.flushed = true;
      sm.loss = report->loss;
      sm.grad_norm = report->grad_norm;
      sm.clip_frac = report->clip_fraction;
      sm.approx_kl = report->approx_kl;
    }
    sm.evicted = state.queue(s).evicted() - evicted_before;
    sm.queue_len = state.queue(s).groups();
    sm.entropy = collected.entropy[idx];
  }

  if (state.config.mastery.readmit && state.config.mastery.audit_every > 0 &&
      state.collection_step % state.config.mastery.audit_every == 0) {
    Rng audit_rng(seed_for(state.config.seed, "audit",
                           static_cast<std::uint64_t>(state.collection_step)));
    const auto report =
        audit(state.mastery, state.params, state.pool, state.config.mastery.audit_n, audit_rng);
    for (const auto& e : report.entries) {
      const double rate = static_cast<double>(e.correct) / static_cast<double>(report.n);
      if (rate < state.config.mastery.readmit_below) state.mastery.readmit(e.question);
    }
  }

  m.mastered_count = state.mastery.mastered_count();
  m.active_pool_size = state.mastery.active_count();
  m.optimizer_step = state.step;
  state.metrics.push_back(m);
  return state.metrics.back();
}

RunResult run(TrainerState& state, std::int64_t num_steps,
              const std::function<void(const StepMetrics&)>& on_step) {
  if (num_steps < 1) throw ContractViolation("run: num_steps must be at least 1");
  RunResult result;
  for (std::int64_t i = 0; i < num_steps; ++i) {
    try {
      const auto& m = train_step(state);
      ++result.steps_run;
      if (on_step) on_step(m);
    } catch (const TrainingComplete&) {
      result.completed_pool = true;
      break;
    }
  }
  return result;
}

}  // namespace seirenes
