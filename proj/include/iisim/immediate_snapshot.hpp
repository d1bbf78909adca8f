#pragma once

// One-shot immediate snapshot built from levels n down to 1 over the kernel,
// and the reference IIS executor that turns partition schedules into traces.

#include <algorithm>
#include <optional>
#include <vector>

#include "iisim/core.hpp"
#include "iisim/kernel.hpp"
#include "iisim/schedule.hpp"

namespace iisim {

// Register of one invoker: the lowest level it has registered at and its input.
// Registering at level l implies registration at every level above l.
struct LevelRegistration {
  int level = 0;
  int value = 0;
  bool operator==(const LevelRegistration&) const = default;
};

// Registration sets per level, derived from a memory image. boards[l-1] holds
// the processes registered at level l.
inline std::vector<ProcSet> level_board(const MemoryImage<LevelRegistration>& image, int n) {
  std::vector<ProcSet> boards(static_cast<std::size_t>(n));
  for (ProcessId j = 1; j <= static_cast<int>(image.size()); ++j) {
    const auto& reg = image[static_cast<std::size_t>(j - 1)];
    if (!reg) continue;
    for (int l = reg->level; l <= n; ++l) boards[static_cast<std::size_t>(l - 1)].insert(j);
  }
  return boards;
}

struct ISOutput {
  View view;
  std::vector<std::optional<int>> values;  // input of every member, by id
  int level = 0;
  bool operator==(const ISOutput&) const = default;
};

// One invoker of a one-shot IS object. Each level costs one registration write
// and one snapshot; the invoker returns at the first level whose registration
// set has exactly that many members.
class ImmediateSnapshotProcess {
 public:
  using value_type = LevelRegistration;

  ImmediateSnapshotProcess(int n, ProcessId self) : n_(n), self_(self) {
    check_system_size(n);
    check_process(self, n);
  }

  void invoke(int value) {
    if (invoked_) throw ContractViolation("process " + std::to_string(self_) + " invoked IS twice");
    invoked_ = true;
    value_ = value;
    level_ = n_;
    phase_ = Phase::register_level;
  }

  std::optional<Primitive<value_type>> pending() const {
    switch (phase_) {
      case Phase::register_level: return WriteOp<value_type>{{level_, value_}};
      case Phase::snapshot_level: return SnapshotOp{};
      default: return std::nullopt;
    }
  }

  void on_write_done() { phase_ = Phase::snapshot_level; }

  void on_snapshot(const MemoryImage<value_type>& image) {
    ProcSet here = level_board(image, n_)[static_cast<std::size_t>(level_ - 1)];
    if (here.size() > level_) {
      throw SimulationFault("level " + std::to_string(level_) + " holds " + here.str());
    }
    if (here.size() == level_) {
      ISOutput out;
      out.view = here;
      out.level = level_;
      out.values.resize(static_cast<std::size_t>(n_));
      for (ProcessId j : here.members()) out.values[static_cast<std::size_t>(j - 1)] = image[static_cast<std::size_t>(j - 1)]->value;
      output_ = std::move(out);
      phase_ = Phase::done;
      return;
    }
    --level_;
    phase_ = Phase::register_level;
  }

  bool invoked() const { return invoked_; }
  const std::optional<ISOutput>& output() const { return output_; }
  int level() const { return level_; }

  bool operator==(const ImmediateSnapshotProcess&) const = default;

 private:
  enum class Phase : std::uint8_t { idle, register_level, snapshot_level, done };

  int n_;
  ProcessId self_;
  bool invoked_ = false;
  int value_ = 0;
  int level_ = 0;
  Phase phase_ = Phase::idle;
  std::optional<ISOutput> output_;
};

// Fresh IS invokers for `participants`; others never invoke. Inputs are ids.
inline std::vector<ImmediateSnapshotProcess> make_is_object(int n, ProcSet participants) {
  std::vector<ImmediateSnapshotProcess> procs;
  for (ProcessId p = 1; p <= n; ++p) {
    procs.emplace_back(n, p);
    if (participants.contains(p)) procs.back().invoke(p);
  }
  return procs;
}

// Reconstructs the ordered partition realized by a set of IS views: blocks are
// the successive differences of the distinct views sorted by size. Returns
// nullopt when the views are not those of any ordered partition.
inline std::optional<OrderedPartition> partition_from_views(const std::vector<View>& views) {
  std::vector<View> distinct;
  ProcSet owners;
  for (std::size_t k = 0; k < views.size(); ++k) {
    if (views[k].empty()) continue;
    owners.insert(static_cast<ProcessId>(k + 1));
    if (std::find(distinct.begin(), distinct.end(), views[k]) == distinct.end()) distinct.push_back(views[k]);
  }
  std::sort(distinct.begin(), distinct.end(), [](View a, View b) { return a.size() < b.size(); });
  OrderedPartition p;
  ProcSet prev;
  for (View v : distinct) {
    if (!prev.subset_of(v) || prev == v) return std::nullopt;
    p.blocks.push_back(v - prev);
    prev = v;
  }
  // Every owner must sit in the block that completes its view.
  auto realized = p.views(static_cast<int>(views.size()));
  for (ProcessId id : owners.members())
    if (realized[static_cast<std::size_t>(id - 1)] != views[static_cast<std::size_t>(id - 1)]) return std::nullopt;
  return p;
}

// The reference IIS model: the trace is exactly the scheduled partitions,
// truncated to `rounds`. Throws InvalidInput on a malformed or non-nested schedule.
inline IISTrace iis_run(int n, const std::vector<OrderedPartition>& schedule, int rounds) {
  IISTrace t;
  t.n = n;
  for (int r = 0; r < rounds && r < static_cast<int>(schedule.size()); ++r)
    t.rounds.push_back(schedule[static_cast<std::size_t>(r)]);
  validate_iis_trace(t);
  return t;
}

inline IISTrace iis_run(const IISSchedule& schedule, int rounds) {
  IISTrace t = schedule.expand(rounds);
  validate_iis_trace(t);
  return t;
}

}  // namespace iisim
