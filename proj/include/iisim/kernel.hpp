#pragma once

// Deterministic executor for per-process state machines over single-writer
// registers with an atomic snapshot primitive. One activation performs exactly
// one shared-memory primitive of the activated process.

#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "iisim/core.hpp"
#include "iisim/schedule.hpp"

namespace iisim {

template <class V>
struct WriteOp {
  V value;
};

struct SnapshotOp {};

template <class V>
using Primitive = std::variant<WriteOp<V>, SnapshotOp>;

template <class V>
using MemoryImage = std::vector<std::optional<V>>;

// A protocol is a per-process state machine. pending() names the primitive the
// process performs on its next activation (nullopt once it has halted); the
// kernel then reports completion through on_write_done() or on_snapshot().
template <class P>
concept Protocol = requires(P p, const P cp, const MemoryImage<typename P::value_type>& image) {
  typename P::value_type;
  { cp.pending() } -> std::same_as<std::optional<Primitive<typename P::value_type>>>;
  p.on_write_done();
  p.on_snapshot(image);
};

// Single-writer register array with crash bookkeeping and trace recording.
template <class V>
class SharedMemory {
 public:
  explicit SharedMemory(int n, bool record = true) : cells_(static_cast<std::size_t>(n)), record_(record) {
    check_system_size(n);
    trace_.n = n;
    crashed_.assign(static_cast<std::size_t>(n), false);
  }

  int n() const { return trace_.n; }

  // False (and no effect) when the actor has crashed.
  bool write(ProcessId actor, V value) {
    check_process(actor, n());
    if (crashed(actor)) return false;
    if (record_) trace_.events.push_back({actor, Update<V>{value}});
    cells_[static_cast<std::size_t>(actor - 1)] = std::move(value);
    return true;
  }

  std::optional<MemoryImage<V>> snapshot(ProcessId actor) {
    check_process(actor, n());
    if (crashed(actor)) return std::nullopt;
    if (record_) trace_.events.push_back({actor, SnapshotResult<V>{cells_}});
    return cells_;
  }

  void crash(ProcessId p) { crashed_[static_cast<std::size_t>(p - 1)] = true; }
  bool crashed(ProcessId p) const { return crashed_[static_cast<std::size_t>(p - 1)]; }

  const MemoryImage<V>& cells() const { return cells_; }
  const ASTrace<V>& trace() const { return trace_; }
  ASTrace<V>& trace() { return trace_; }

 private:
  MemoryImage<V> cells_;
  std::vector<bool> crashed_;
  ASTrace<V> trace_;
  bool record_;
};

enum class HaltReason : std::uint8_t { script_exhausted, horizon_reached, all_decided };

inline const char* to_string(HaltReason h) {
  switch (h) {
    case HaltReason::script_exhausted: return "script_exhausted";
    case HaltReason::horizon_reached: return "horizon_reached";
    case HaltReason::all_decided: return "all_decided";
  }
  return "?";
}

enum class StepOutcome : std::uint8_t { performed, halted, crashed };

template <Protocol P>
class Executor {
 public:
  using value_type = typename P::value_type;
  using StepHook = std::function<void(std::size_t step, const ASEvent<value_type>*)>;

  // processes[k] runs as process k+1.
  explicit Executor(std::vector<P> processes, bool record = true)
      : memory_(static_cast<int>(processes.size()), record), procs_(std::move(processes)) {}

  int n() const { return memory_.n(); }
  P& process(ProcessId p) { return procs_[static_cast<std::size_t>(p - 1)]; }
  const P& process(ProcessId p) const { return procs_[static_cast<std::size_t>(p - 1)]; }
  const std::vector<P>& processes() const { return procs_; }
  SharedMemory<value_type>& memory() { return memory_; }
  const SharedMemory<value_type>& memory() const { return memory_; }

  // Processes that are neither crashed nor halted.
  ProcSet enabled() const {
    ProcSet s;
    for (ProcessId p = 1; p <= n(); ++p)
      if (!memory_.crashed(p) && process(p).pending()) s.insert(p);
    return s;
  }

  void crash(ProcessId p) { memory_.crash(p); }

  // Observes every activation; the event pointer is null for no-op activations.
  void set_step_hook(StepHook hook) { hook_ = std::move(hook); }

  StepOutcome activate(ProcessId actor) {
    check_process(actor, n());
    const std::size_t step = steps_++;
    if (memory_.crashed(actor)) {
      if (hook_) hook_(step, nullptr);
      return StepOutcome::crashed;
    }
    P& proc = process(actor);
    auto op = proc.pending();
    if (!op) {
      if (hook_) hook_(step, nullptr);
      return StepOutcome::halted;
    }
    if (auto* w = std::get_if<WriteOp<value_type>>(&*op)) {
      memory_.write(actor, std::move(w->value));
      proc.on_write_done();
    } else {
      auto image = memory_.snapshot(actor);
      proc.on_snapshot(*image);
    }
    if (hook_) hook_(step, last_event());
    return StepOutcome::performed;
  }

  std::size_t steps() const { return steps_; }

 private:
  const ASEvent<value_type>* last_event() const {
    const auto& ev = memory_.trace().events;
    return ev.empty() ? nullptr : &ev.back();
  }

  SharedMemory<value_type> memory_;
  std::vector<P> procs_;
  StepHook hook_;
  std::size_t steps_ = 0;
};

template <Protocol P>
struct ExecutionRecord {
  ASTrace<typename P::value_type> as_trace;
  std::vector<P> processes;
  HaltReason halted = HaltReason::horizon_reached;
  std::size_t steps = 0;
};

// Runs the processes under the schedule for at most `horizon` activations.
// A pure function of its arguments.
template <Protocol P>
ExecutionRecord<P> run(std::vector<P> processes, Schedule schedule, std::size_t horizon,
                       typename Executor<P>::StepHook hook = {}) {
  Executor<P> ex(std::move(processes));
  if (hook) ex.set_step_hook(std::move(hook));
  ExecutionRecord<P> rec;
  rec.halted = HaltReason::horizon_reached;
  for (std::size_t step = 0; step < horizon; ++step) {
    for (ProcessId p = 1; p <= ex.n(); ++p)
      if (schedule.crashed_at(p, step)) ex.crash(p);
    ProcSet enabled = ex.enabled();
    if (enabled.empty() && !schedule.is_script()) {
      rec.halted = HaltReason::all_decided;
      break;
    }
    auto who = schedule.next(step, enabled);
    if (!who) {
      rec.halted = schedule.is_script() ? HaltReason::script_exhausted : HaltReason::all_decided;
      break;
    }
    ex.activate(*who);
  }
  rec.steps = ex.steps();
  rec.as_trace = ex.memory().trace();
  rec.processes = ex.processes();
  return rec;
}

// Full-information style protocol over counters: writes the number of
// snapshots taken so far, then snapshots, forever.
class AlternatingProcess {
 public:
  using value_type = std::int64_t;

  std::optional<Primitive<value_type>> pending() const {
    if (write_next_) return WriteOp<value_type>{snapshots_};
    return SnapshotOp{};
  }
  void on_write_done() { write_next_ = false; }
  void on_snapshot(const MemoryImage<value_type>& image) {
    last_ = image;
    ++snapshots_;
    write_next_ = true;
  }

  std::int64_t snapshots() const { return snapshots_; }
  const MemoryImage<value_type>& last_snapshot() const { return last_; }

 private:
  bool write_next_ = true;
  std::int64_t snapshots_ = 0;
  MemoryImage<value_type> last_;
};

}  // namespace iisim
