#include "iasolve/delay.hpp"

#include <algorithm>

#include "iasolve/kernels.hpp"

namespace iasolve {

DelaySchedule DelaySchedule::last_update(SelectionRule sel, std::uint64_t sel_seed) {
  DelaySchedule s;
  s.policy = DelayPolicy::LastUpdate;
  s.selection = sel;
  s.selection_seed = sel_seed;
  return s;
}

DelaySchedule DelaySchedule::zero_delay(SelectionRule sel, std::uint64_t sel_seed) {
  DelaySchedule s;
  s.policy = DelayPolicy::ZeroDelay;
  s.selection = sel;
  s.selection_seed = sel_seed;
  return s;
}

DelaySchedule DelaySchedule::fixed_delay(int d, SelectionRule sel, std::uint64_t sel_seed) {
  require(d >= 0, "fixed_delay: d must be nonnegative");
  DelaySchedule s;
  s.policy = DelayPolicy::FixedDelay;
  s.d = d;
  s.b = d;
  s.selection = sel;
  s.selection_seed = sel_seed;
  return s;
}

DelaySchedule DelaySchedule::uniform_random(int b, std::uint64_t seed, SelectionRule sel,
                                            std::uint64_t sel_seed) {
  require(b >= 0, "uniform_random: b must be nonnegative");
  DelaySchedule s;
  s.policy = DelayPolicy::UniformRandom;
  s.b = b;
  s.seed = seed;
  s.selection = sel;
  s.selection_seed = sel_seed;
  return s;
}

std::optional<int> DelaySchedule::effective_bound(int m) const {
  switch (policy) {
    case DelayPolicy::ZeroDelay: return 0;
    case DelayPolicy::FixedDelay: return d;
    case DelayPolicy::UniformRandom: return b;
    case DelayPolicy::LastUpdate:
      // Cyclic selection revisits every component within m iterations.  At
      // the moment a step reads the table the selected slot is being (or has
      // just been) refreshed at the current point, so the oldest slot dates
      // back m-1 iterations; random selection admits arbitrarily long gaps.
      if (selection == SelectionRule::Cyclic) return m - 1;
      return std::nullopt;
  }
  return std::nullopt;
}

DelayEngine::DelayEngine(DelaySchedule schedule, int m)
    : schedule_(schedule),
      m_(m),
      selection_rng_(schedule.selection_seed),
      delay_rng_(schedule.seed) {
  require(m >= 1, "delay engine: m must be positive");
}

namespace {
// Bounded draw from raw 64-bit output, stable across standard libraries.
int bounded_draw(std::mt19937_64& rng, int count) {
  const std::uint64_t bound = std::uint64_t(count);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return int(v % bound);
}
}  // namespace

int DelayEngine::select(int k) {
  if (schedule_.selection == SelectionRule::Cyclic) return k % m_;
  require(k == last_selected_k_ + 1, "random selection must be driven in iteration order");
  last_selected_k_ = k;
  return bounded_draw(selection_rng_, m_);
}

std::optional<std::vector<int>> DelayEngine::plan(int k) {
  switch (schedule_.policy) {
    case DelayPolicy::LastUpdate:
      return std::nullopt;
    case DelayPolicy::ZeroDelay:
      return std::vector<int>(size_t(m_), k);
    case DelayPolicy::FixedDelay:
      return std::vector<int>(size_t(m_), std::max(0, k - schedule_.d));
    case DelayPolicy::UniformRandom: {
      std::vector<int> l(static_cast<size_t>(m_));
      int lo = std::max(0, k - schedule_.b);
      for (int i = 0; i < m_; ++i) l[size_t(i)] = lo + bounded_draw(delay_rng_, k - lo + 1);
      return l;
    }
  }
  return std::nullopt;
}

GradientTable::GradientTable(int m, int dim) : dim_(dim) {
  require(m >= 1 && dim >= 1, "gradient table: m and dim must be positive");
  slots_.assign(size_t(m), Vector::Zero(dim));
  stamps_.assign(size_t(m), 0);
  aggregate_ = Vector::Zero(dim);
}

void GradientTable::initialize(const std::function<Vector(int)>& value_fn, int stamp) {
  for (int i = 0; i < m(); ++i) {
    slots_[size_t(i)] = value_fn(i);
    stamps_[size_t(i)] = stamp;
  }
  aggregate_ = recompute_aggregate();
  refresh_count_ = 0;
}

void GradientTable::refresh(int i, const Vector& value, int stamp) {
  require(i >= 0 && i < m(), "gradient table: index out of range");
  require(value.size() == dim_, "gradient table: value dimension mismatch");
  aggregate_ += value - slots_[size_t(i)];
  slots_[size_t(i)] = value;
  stamps_[size_t(i)] = stamp;
  if (++refresh_count_ % kRecomputePeriod == 0) aggregate_ = recompute_aggregate();
}

std::vector<int> GradientTable::staleness(int k) const {
  std::vector<int> s(slots_.size());
  for (size_t i = 0; i < slots_.size(); ++i) s[i] = k - stamps_[i];
  return s;
}

int GradientTable::max_staleness(int k) const {
  int worst = 0;
  for (int st : stamps_) worst = std::max(worst, k - st);
  return worst;
}

Vector GradientTable::recompute_aggregate() const {
  Vector out;
  kernels::aggregate_sum(slots_, out);
  return out;
}

}  // namespace iasolve
