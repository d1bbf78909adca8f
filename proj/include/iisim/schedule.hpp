#pragma once

// Activation schedules for the AS kernel and partition schedules for IIS runs.
// Seeded schedules are pure functions of their seed.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "iisim/core.hpp"

namespace iisim {

struct FairnessParams {
  // A live process is forced after this many activations without a step.
  // Zero selects 4n.
  std::size_t starvation_bound = 0;
  // Draw per-process activation weights in [1, max_weight]; 1 disables skew.
  int max_weight = 6;
};

// Either a finite script of process choices or a seeded fair stream. Crashes
// map a process to the activation index from which it takes no steps.
class Schedule {
 public:
  static Schedule script(int n, std::vector<ProcessId> steps,
                         std::map<ProcessId, std::size_t> crashes = {}) {
    check_system_size(n);
    for (ProcessId p : steps) check_process(p, n);
    Schedule s(n);
    s.script_ = std::move(steps);
    s.crashes_ = std::move(crashes);
    return s;
  }

  static Schedule seeded(int n, std::uint64_t seed, std::map<ProcessId, std::size_t> crashes = {},
                         FairnessParams fairness = {}) {
    check_system_size(n);
    Schedule s(n);
    s.seeded_ = true;
    s.rng_.seed(seed);
    s.crashes_ = std::move(crashes);
    s.bound_ = fairness.starvation_bound ? fairness.starvation_bound
                                         : static_cast<std::size_t>(4 * n);
    std::uniform_int_distribution<int> w(1, std::max(1, fairness.max_weight));
    for (int i = 0; i < n; ++i) s.weights_.push_back(w(s.rng_));
    s.last_step_.assign(static_cast<std::size_t>(n), 0);
    return s;
  }

  int n() const { return n_; }
  bool is_script() const { return !seeded_; }
  const std::map<ProcessId, std::size_t>& crashes() const { return crashes_; }
  const std::vector<ProcessId>& script_steps() const { return script_; }

  bool crashed_at(ProcessId p, std::size_t step) const {
    auto it = crashes_.find(p);
    return it != crashes_.end() && step >= it->second;
  }

  // Next process to activate at activation index `step`. Scripts return their
  // next entry regardless of `eligible`; streams choose among eligible,
  // non-crashed processes. nullopt ends the run.
  std::optional<ProcessId> next(std::size_t step, ProcSet eligible) {
    if (!seeded_) {
      if (cursor_ >= script_.size()) return std::nullopt;
      return script_[cursor_++];
    }
    ProcSet live;
    for (ProcessId p : eligible.members())
      if (!crashed_at(p, step)) live.insert(p);
    if (live.empty()) return std::nullopt;

    ProcessId chosen = 0;
    std::size_t worst = 0;
    for (ProcessId p : live.members()) {
      std::size_t idle = step - last_step_[static_cast<std::size_t>(p - 1)];
      if (idle >= bound_ && idle > worst) {
        worst = idle;
        chosen = p;
      }
    }
    if (chosen == 0) {
      int total = 0;
      for (ProcessId p : live.members()) total += weights_[static_cast<std::size_t>(p - 1)];
      int pick = std::uniform_int_distribution<int>(0, total - 1)(rng_);
      for (ProcessId p : live.members()) {
        pick -= weights_[static_cast<std::size_t>(p - 1)];
        if (pick < 0) {
          chosen = p;
          break;
        }
      }
    }
    last_step_[static_cast<std::size_t>(chosen - 1)] = step;
    return chosen;
  }

 private:
  explicit Schedule(int n) : n_(n) {}

  int n_;
  bool seeded_ = false;
  std::vector<ProcessId> script_;
  std::size_t cursor_ = 0;
  std::map<ProcessId, std::size_t> crashes_;
  std::mt19937_64 rng_;
  std::size_t bound_ = 0;
  std::vector<int> weights_;
  std::vector<std::size_t> last_step_;
};

// Crash plan: each process crashes with probability `crash_prob` at a step drawn
// uniformly from [0, latest_step); at least one process never crashes.
inline std::map<ProcessId, std::size_t> random_crashes(int n, std::uint64_t seed, double crash_prob,
                                                       std::size_t latest_step) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::map<ProcessId, std::size_t> crashes;
  if (crash_prob <= 0.0 || latest_step == 0) return crashes;
  std::bernoulli_distribution coin(crash_prob);
  std::uniform_int_distribution<std::size_t> when(0, latest_step - 1);
  for (ProcessId p = 1; p <= n; ++p) {
    bool c = coin(rng);
    std::size_t at = when(rng);
    if (c) crashes[p] = at;
  }
  if (static_cast<int>(crashes.size()) == n) {
    ProcessId survivor = std::uniform_int_distribution<int>(1, n)(rng);
    crashes.erase(survivor);
  }
  return crashes;
}

// ---------------------------------------------------------------------------
// IIS partition schedules

// A finite list of rounds, optionally repeated periodically.
struct IISSchedule {
  int n = 0;
  std::vector<OrderedPartition> rounds;
  bool repeat = false;

  // Expands to `count` rounds; a non-repeating schedule stops at its end.
  IISTrace expand(int count) const {
    IISTrace t;
    t.n = n;
    if (rounds.empty()) return t;
    for (int r = 0; r < count; ++r) {
      if (!repeat && r >= static_cast<int>(rounds.size())) break;
      t.rounds.push_back(rounds[static_cast<std::size_t>(r) % rounds.size()]);
    }
    return t;
  }
};

struct IISFuzzParams {
  // Probability that a process leaves the schedule permanently.
  double departure_prob = 0.3;
  // Departures happen in rounds [2, departure_horizon].
  int departure_horizon = 50;
  // Probability that one process runs as an unseen straggler: present every
  // round, always alone in the last block.
  double straggler_prob = 0.2;
  // Probability that a process never participates.
  double absent_prob = 0.05;
};

// Ordered partition of `members` with random order and random block cuts.
template <class Rng>
OrderedPartition random_partition(ProcSet members, Rng& rng) {
  std::vector<ProcessId> order = members.members();
  std::shuffle(order.begin(), order.end(), rng);
  OrderedPartition p;
  std::bernoulli_distribution cut(0.5);
  ProcSet block;
  for (std::size_t k = 0; k < order.size(); ++k) {
    block.insert(order[k]);
    if (k + 1 == order.size() || cut(rng)) {
      p.blocks.push_back(block);
      block = ProcSet{};
    }
  }
  return p;
}

// Random nested partitions with permanent departures.
inline IISTrace random_iis_trace(int n, int rounds, std::uint64_t seed, const IISFuzzParams& fp = {}) {
  check_system_size(n);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution absent(fp.absent_prob), departs(fp.departure_prob),
      straggle(fp.straggler_prob);

  ProcSet start;
  for (ProcessId p = 1; p <= n; ++p)
    if (!absent(rng)) start.insert(p);
  if (start.empty()) start.insert(std::uniform_int_distribution<int>(1, n)(rng));

  std::map<ProcessId, int> leave_at;
  std::uniform_int_distribution<int> when(2, std::max(2, fp.departure_horizon));
  for (ProcessId p : start.members())
    if (departs(rng)) leave_at[p] = when(rng);
  // Someone stays forever.
  if (static_cast<int>(leave_at.size()) == start.size()) leave_at.erase(start.members().front());

  ProcessId straggler = 0;
  if (n > 1 && start.size() > 1 && straggle(rng)) {
    auto m = start.members();
    straggler = m[std::uniform_int_distribution<std::size_t>(0, m.size() - 1)(rng)];
  }

  IISTrace t;
  t.n = n;
  for (int r = 1; r <= rounds; ++r) {
    ProcSet here;
    for (ProcessId p : start.members()) {
      auto it = leave_at.find(p);
      if (it == leave_at.end() || r < it->second) here.insert(p);
    }
    if (straggler != 0 && here.contains(straggler) && here.size() > 1) {
      here.erase(straggler);
      OrderedPartition op = random_partition(here, rng);
      op.blocks.push_back(ProcSet::of({straggler}));
      t.rounds.push_back(std::move(op));
    } else {
      t.rounds.push_back(random_partition(here, rng));
    }
  }
  return t;
}

}  // namespace iisim
