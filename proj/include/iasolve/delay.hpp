#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "iasolve/types.hpp"

namespace iasolve {

enum class DelayPolicy { LastUpdate, FixedDelay, UniformRandom, ZeroDelay };
enum class SelectionRule { Cyclic, Random };

// Which component is processed at each iteration and how stale the stored
// information for the others may be.  All randomness is seeded and replayed
// deterministically.
struct DelaySchedule {
  DelayPolicy policy = DelayPolicy::LastUpdate;
  int b = 0;               // delay bound for UniformRandom
  int d = 0;               // fixed delay for FixedDelay
  std::uint64_t seed = 0;  // delay draws
  SelectionRule selection = SelectionRule::Cyclic;
  std::uint64_t selection_seed = 0;

  static DelaySchedule last_update(SelectionRule sel = SelectionRule::Cyclic,
                                   std::uint64_t sel_seed = 0);
  static DelaySchedule zero_delay(SelectionRule sel = SelectionRule::Cyclic,
                                  std::uint64_t sel_seed = 0);
  static DelaySchedule fixed_delay(int d, SelectionRule sel = SelectionRule::Cyclic,
                                   std::uint64_t sel_seed = 0);
  static DelaySchedule uniform_random(int b, std::uint64_t seed,
                                      SelectionRule sel = SelectionRule::Cyclic,
                                      std::uint64_t sel_seed = 0);

  // Largest staleness the policy can emit, measured at the moment a step
  // reads the table (after the iteration's own refreshes at the current
  // point, before any refresh stamped at the next point); the delay-contract
  // assertion compares trace staleness against this.  Empty means unbounded
  // (LastUpdate with random selection).
  std::optional<int> effective_bound(int m) const;
};

// Stateful instantiation of a schedule for an m-component run.
class DelayEngine {
 public:
  DelayEngine(DelaySchedule schedule, int m);

  const DelaySchedule& schedule() const { return schedule_; }
  int m() const { return m_; }

  // Component processed at iteration k.  Must be called once per iteration,
  // in order, when the selection rule is Random.
  int select(int k);

  // For resampling policies, the source iteration index l_i for every
  // component at iteration k (l_i in [max(0, k - bound), k]).  Empty for
  // LastUpdate, where slots advance only when a component is processed.
  std::optional<std::vector<int>> plan(int k);

 private:
  DelaySchedule schedule_;
  int m_;
  std::mt19937_64 selection_rng_;
  std::mt19937_64 delay_rng_;
  int last_selected_k_ = -1;
};

// Per-component gradient slots with stamps and a running aggregate.  The
// aggregate is updated incrementally on refresh and recomputed from scratch
// every recompute_period refreshes to stop drift.
class GradientTable {
 public:
  GradientTable() = default;
  GradientTable(int m, int dim);

  // Fills every slot with value_fn(i), stamps everything with stamp.
  void initialize(const std::function<Vector(int)>& value_fn, int stamp);

  void refresh(int i, const Vector& value, int stamp);

  const Vector& slot(int i) const { return slots_[i]; }
  int stamp(int i) const { return stamps_[i]; }
  const Vector& aggregate() const { return aggregate_; }
  // aggregate() minus one slot, the "all others" sum.
  Vector aggregate_excluding(int i) const { return aggregate_ - slots_[i]; }

  int m() const { return int(slots_.size()); }
  int dim() const { return dim_; }

  std::vector<int> staleness(int k) const;  // k - stamp_i per component
  int max_staleness(int k) const;

  Vector recompute_aggregate() const;  // exact fixed-order sum over slots

  static constexpr int kRecomputePeriod = 1000;

 private:
  int dim_ = 0;
  std::vector<Vector> slots_;
  std::vector<int> stamps_;
  Vector aggregate_;
  long refresh_count_ = 0;
};

}  // namespace iasolve
