#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "seirenes/bundle.hpp"
#include "seirenes/config.hpp"
#include "seirenes/credit.hpp"
#include "seirenes/diagnostics.hpp"
#include "seirenes/mastery.hpp"
#include "seirenes/update.hpp"

namespace seirenes {

// Every queue mutation, for replay against an external oracle.
struct QueueEvent {
  enum class Kind { Enqueue, Evict, Consume };
  Kind kind;
  std::uint64_t arrival;
  std::int64_t step;  // optimizer step at the time of the event
};

struct EnqueueResult {
  std::size_t accepted = 0;
  bool backpressure = false;  // some groups did not fit and were handed back
};

// Bounded FIFO of pending groups for one stream. Size is measured in units:
// groups for clean/robust, hint trajectories for the adversary stream.
class StreamQueue {
 public:
  StreamQueue(Stream stream, std::size_t flush_size, std::size_t capacity, std::int64_t max_lag);

  Stream stream() const { return stream_; }
  std::size_t flush_size() const { return flush_size_; }
  std::size_t capacity() const { return capacity_; }
  std::int64_t max_lag() const { return max_lag_; }

  std::size_t units() const { return units_; }
  std::size_t groups() const { return pending_.size(); }
  std::size_t room() const { return capacity_ - units_; }
  const std::deque<RolloutGroup>& pending() const { return pending_; }

  // Appends in order until the next group would exceed capacity; groups
  // that do not fit stay in `groups` (moved-from entries are erased).
  EnqueueResult enqueue(std::vector<RolloutGroup>& groups, std::int64_t current_step);

  // Drops every group with current_step − birth_step > max_lag.
  std::size_t evict_stale(std::int64_t current_step);

  // Removes the oldest groups until at least `units` units are taken.
  std::vector<RolloutGroup> take_oldest(std::size_t units, std::int64_t current_step);

  std::size_t produced() const { return produced_; }
  std::size_t consumed() const { return consumed_; }
  std::size_t evicted() const { return evicted_; }
  std::int64_t max_consumed_lag() const { return max_consumed_lag_; }

  void record_events(bool on) { record_ = on; }
  const std::vector<QueueEvent>& events() const { return events_; }

 private:
  std::size_t units_of(const RolloutGroup& g) const;

  Stream stream_;
  std::size_t flush_size_;
  std::size_t capacity_;
  std::int64_t max_lag_;
  std::deque<RolloutGroup> pending_;
  std::size_t units_ = 0;
  std::uint64_t next_arrival_ = 0;
  std::size_t produced_ = 0;
  std::size_t consumed_ = 0;
  std::size_t evicted_ = 0;
  std::int64_t max_consumed_lag_ = 0;
  bool record_ = false;
  std::vector<QueueEvent> events_;
};

// Test hook: returns true to drop a candidate group after the zero-signal
// filter (used to force asymmetric survival rates).
using ExtraFilter = std::function<bool(const RolloutGroup&, std::int64_t collection_step)>;

// Sees every collected bundle in ascending question order (debug dumps).
using BundleSink = std::function<void(const RolloutBundle&)>;

struct TrainerState {
  RunConfig config;
  TaskPool pool;
  PolicyParams params;
  PolicyParams reference;  // frozen initial policy for the optional KL term
  OptimizerState optimizer;
  std::array<StreamQueue, kStreamCount> queues;
  std::int64_t step = 0;  // optimizer steps across all streams
  std::array<std::int64_t, kStreamCount> stream_steps{};
  std::int64_t collection_step = 0;
  std::uint64_t next_bundle_serial = 0;
  MasteryTracker mastery;
  std::vector<StepMetrics> metrics;
  ExtraFilter extra_filter;
  BundleSink bundle_sink;

  StreamQueue& queue(Stream s) { return queues[static_cast<std::size_t>(s)]; }
  const StreamQueue& queue(Stream s) const { return queues[static_cast<std::size_t>(s)]; }
};

TrainerState make_trainer(const RunConfig& config);

// Filtered candidate groups of one collection step, per stream, in
// ascending question order.
struct CollectResult {
  std::array<std::vector<RolloutGroup>, kStreamCount> groups;
  std::array<bool, kStreamCount> suspended{};
  double p1_bar = 0.0;
  double p3_bar = 0.0;
  std::array<double, kStreamCount> entropy{};
  std::size_t retired = 0;
};

// Collects bundles for `batch` (any order; merged by ascending id), builds
// and filters candidate groups, and feeds mastery observations. A stream
// whose queue is full is suspended for the round and yields no groups.
// Throws TrainingComplete for an empty batch.
CollectResult collect_step(TrainerState& state, std::span<const QuestionId> batch);

// Flushes `stream` if it holds at least M_s units after evicting stale
// groups; consumes only the oldest M_s.
std::optional<UpdateReport> maybe_flush(TrainerState& state, Stream stream);

// One full collection step: sample, collect, enqueue, flush in stream order.
// Groups that hit a full queue mid-round are never produced (sampling for
// that stream stops). Appends and returns the step record. Throws TrainingComplete when the
// active pool is empty.
const StepMetrics& train_step(TrainerState& state);

struct RunResult {
  std::int64_t steps_run = 0;
  bool completed_pool = false;  // stopped early because every question retired
};

// Runs up to num_steps collection steps; `on_step` sees each record as it
// is produced. Throws ContractViolation for num_steps < 1.
RunResult run(TrainerState& state, std::int64_t num_steps,
              const std::function<void(const StepMetrics&)>& on_step = {});

}  // namespace seirenes
