#pragma once

// IIS -> AS: processes of an IIS run simulate atomic snapshots with counter
// vectors. A process outputs when every vector in its immediate snapshot is
// identical, or (helping mode) when some process in its view published a
// snapshot that already holds the caller's latest counter.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iisim/analysis.hpp"
#include "iisim/core.hpp"
#include "iisim/immediate_snapshot.hpp"

namespace iisim {

enum class HelpMode : std::uint8_t { helping, baseline };

inline const char* to_string(HelpMode m) { return m == HelpMode::helping ? "helping" : "baseline"; }

struct Alg2State {
  ProcessId self = 1;
  CounterVector counters;       // C_i
  CounterVector last_snapshot;  // SI_i
  int round = 0;
  std::int64_t outputs = 0;

  static Alg2State initial(int n, ProcessId i) {
    return {i, CounterVector::initial(n, i), CounterVector(static_cast<std::size_t>(n)), 0, 0};
  }
};

// What a process writes in one IIS round.
struct WrittenPair {
  ProcessId writer = 1;
  CounterVector counters;
  CounterVector last_snapshot;
};

// One round of the simulation at process `st.self`, given the pairs in its
// immediate snapshot. Returns the emitted snapshot, if any.
inline std::optional<CounterVector> alg2_round(Alg2State& st, std::span<const WrittenPair> view, HelpMode mode) {
  const ProcessId i = st.self;
  if (std::none_of(view.begin(), view.end(), [&](const WrittenPair& p) { return p.writer == i; }))
    throw ContractViolation("round view of process " + std::to_string(i) + " misses its own pair");
  ++st.round;

  std::optional<CounterVector> emitted;
  const bool identical = std::all_of(view.begin(), view.end(),
                                     [&](const WrittenPair& p) { return p.counters == view.front().counters; });
  if (identical) {
    emitted = view.front().counters;
  } else if (mode == HelpMode::helping) {
    for (const auto& p : view) {
      if (p.last_snapshot[i] != st.counters[i]) continue;
      if (!emitted || emitted->leq(p.last_snapshot)) emitted = p.last_snapshot;
    }
  }

  CounterVector merged = st.counters;
  for (const auto& p : view) merged = merge_counters({merged, p.counters});
  if (emitted) {
    st.last_snapshot = *emitted;
    ++st.outputs;
    ++merged[i];
  }
  st.counters = std::move(merged);
  return emitted;
}

struct SnapshotOutput {
  ProcessId process = 1;
  int round = 0;
  CounterVector snapshot;
  bool operator==(const SnapshotOutput&) const = default;
};

struct Alg2Run {
  int n = 0;
  HelpMode mode = HelpMode::helping;
  std::vector<SnapshotOutput> outputs;  // emission order: round, then partition order
  std::vector<Alg2State> final_states;

  std::int64_t output_count(ProcessId p) const {
    return final_states[static_cast<std::size_t>(p - 1)].outputs;
  }
};

// Drives every participant through the rounds of `trace`. In each round every
// participant writes its pre-round pair and reads the pairs of its view.
inline Alg2Run run_iis_to_as(const IISTrace& trace, HelpMode mode) {
  Alg2Run run;
  run.n = trace.n;
  run.mode = mode;
  for (ProcessId i = 1; i <= trace.n; ++i) run.final_states.push_back(Alg2State::initial(trace.n, i));
  auto state = [&](ProcessId p) -> Alg2State& { return run.final_states[static_cast<std::size_t>(p - 1)]; };

  for (int r = 1; r <= trace.length(); ++r) {
    const auto& part = trace.round(r);
    std::vector<WrittenPair> written;
    for (ProcessId p : part.participants().members())
      written.push_back({p, state(p).counters, state(p).last_snapshot});
    auto views = part.views(trace.n);
    for (ProcSet block : part.blocks) {
      for (ProcessId i : block.members()) {
        std::vector<WrittenPair> seen;
        for (const auto& w : written)
          if (views[static_cast<std::size_t>(i - 1)].contains(w.writer)) seen.push_back(w);
        if (auto out = alg2_round(state(i), seen, mode)) run.outputs.push_back({i, r, *out});
      }
    }
  }
  return run;
}

// Orders outputs by containment and checks that consecutive distinct
// snapshots differ by +1 in every changed position. Returns the ordered
// outputs; throws SimulationFault on a violation.
inline std::vector<SnapshotOutput> containment_order(std::vector<SnapshotOutput> outputs) {
  std::stable_sort(outputs.begin(), outputs.end(), [](const SnapshotOutput& a, const SnapshotOutput& b) {
    return a.snapshot.total() < b.snapshot.total();
  });
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const CounterVector prev = k == 0 ? CounterVector(outputs[k].snapshot.size()) : outputs[k - 1].snapshot;
    const CounterVector& cur = outputs[k].snapshot;
    if (!prev.leq(cur)) {
      throw SimulationFault("outputs " + prev.str() + " and " + cur.str() + " are not related by containment");
    }
    for (ProcessId i = 1; i <= static_cast<int>(cur.size()); ++i) {
      if (cur[i] != prev[i] && cur[i] != prev[i] + 1) {
        throw SimulationFault("counter of process " + std::to_string(i) + " jumps from " +
                              std::to_string(prev[i]) + " to " + std::to_string(cur[i]));
      }
    }
  }
  return outputs;
}

// Builds the simulated AS run: snapshots in containment order, each preceded
// by the updates that raise the changed counters. A zero counter is bottom.
inline ASTrace<std::int64_t> extract_as_trace(int n, std::vector<SnapshotOutput> outputs) {
  auto ordered = containment_order(std::move(outputs));
  ASTrace<std::int64_t> t;
  t.n = n;
  CounterVector prev(static_cast<std::size_t>(n));
  for (const auto& out : ordered) {
    for (ProcessId i = 1; i <= n; ++i)
      if (out.snapshot[i] != prev[i]) t.events.push_back({i, Update<std::int64_t>{out.snapshot[i]}});
    SnapshotResult<std::int64_t> snap;
    for (ProcessId i = 1; i <= n; ++i)
      snap.cells.push_back(out.snapshot[i] == 0 ? std::nullopt : std::optional<std::int64_t>(out.snapshot[i]));
    t.events.push_back({out.process, std::move(snap)});
    prev = out.snapshot;
  }
  return t;
}

// Processes that perform at least one update in the simulated AS run.
inline ProcSet as_participants(const ASTrace<std::int64_t>& t) {
  ProcSet s;
  for (const auto& ev : t.events)
    if (ev.is_update()) s.insert(ev.actor);
  return s;
}

// Processes that output in every window of `width` rounds after the burn-in.
inline ProcSet output_window_set(const std::vector<SnapshotOutput>& outputs, int n, int rounds,
                                 WindowParams params) {
  std::vector<std::vector<int>> by_process(static_cast<std::size_t>(n));
  for (const auto& o : outputs) by_process[static_cast<std::size_t>(o.process - 1)].push_back(o.round);
  ProcSet live;
  const int first = params.burn_in + 1, last_start = rounds - params.width + 1;
  for (ProcessId p = 1; p <= n; ++p) {
    const auto& rs = by_process[static_cast<std::size_t>(p - 1)];
    bool ok = last_start >= first;
    for (int r = first; ok && r <= last_start; ++r) {
      auto it = std::lower_bound(rs.begin(), rs.end(), r);
      ok = it != rs.end() && *it < r + params.width;
    }
    if (ok) live.insert(p);
  }
  return live;
}

// Windows for output frequency: burn-in 2n, width 2n + 16.
inline WindowParams output_window_defaults(int n) { return {2 * n, 2 * n + 16}; }

struct Theorem2Report {
  ProcSet strongly_correct;  // window form over the IIS trace
  ProcSet output_live;       // output in every window
  bool sets_equal = false;
  // Per strongly-correct process: part(E, i) vs. the AS participants.
  std::vector<std::pair<ProcessId, ProcSet>> participation_mismatches;
  ProcSet as_participants;
  int suffix_start = 1;

  bool ok() const { return sets_equal && participation_mismatches.empty(); }
};

// First round after the last permanent departure.
inline int departure_suffix_start(const IISTrace& t) {
  int start = 1;
  for (int r = 2; r <= t.length(); ++r)
    if (t.participants(r) != t.participants(r - 1)) start = r;
  return start;
}

// Compares the window strongly-correct set of the IIS run with the set of
// processes that keep outputting, both measured on the suffix after the last
// departure, and checks participation sets of strongly-correct processes.
inline Theorem2Report check_theorem2(const IISTrace& trace, const std::vector<SnapshotOutput>& outputs,
                                     const ASTrace<std::int64_t>& as_trace, WindowParams params,
                                     WindowParams output_params) {
  Theorem2Report rep;
  rep.suffix_start = departure_suffix_start(trace);
  IISTrace tail = suffix(trace, rep.suffix_start);
  rep.strongly_correct = strongly_correct_window(tail, params);

  std::vector<SnapshotOutput> shifted;
  for (const auto& o : outputs)
    if (o.round >= rep.suffix_start) shifted.push_back({o.process, o.round - rep.suffix_start + 1, o.snapshot});
  rep.output_live = output_window_set(shifted, trace.n, tail.length(), output_params);
  rep.sets_equal = rep.strongly_correct == rep.output_live;

  rep.as_participants = as_participants(as_trace);
  for (ProcessId i : rep.strongly_correct.members()) {
    ProcSet part = participation_set(trace, i);
    if (part != rep.as_participants) rep.participation_mismatches.emplace_back(i, part);
  }
  return rep;
}

}  // namespace iisim
