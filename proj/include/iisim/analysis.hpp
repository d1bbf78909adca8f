#pragma once

// Awareness graphs over IIS traces, finite-window strongly-correct sets, IS
// axiom checks and participation sets.
//
// Edge i -> j in round r means j is in V_ir. Limit notions are approximated
// on a finite trace by windows: after `burn_in` rounds, every window of
// `width` consecutive rounds must exhibit the required paths.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "iisim/core.hpp"

namespace iisim {

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-edge masks, indexed by process id - 1.
using Adjacency = std::vector<ProcSet>;

inline Adjacency round_graph(const IISTrace& t, int r) { return t.round(r).views(t.n); }

// Union of the round graphs for rounds [from, to], clamped to the trace.
inline Adjacency union_graph(const IISTrace& t, int from, int to) {
  Adjacency out(static_cast<std::size_t>(t.n));
  for (int r = std::max(from, 1); r <= std::min(to, t.length()); ++r) {
    auto g = round_graph(t, r);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] |= g[k];
  }
  return out;
}

// Processes with a directed path to `target` (including the target).
inline ProcSet reaching(const Adjacency& g, ProcessId target) {
  ProcSet reach = ProcSet::of({target});
  bool grew = true;
  while (grew) {
    grew = false;
    for (ProcessId q = 1; q <= static_cast<int>(g.size()); ++q) {
      if (!reach.contains(q) && !(g[static_cast<std::size_t>(q - 1)] & reach).empty()) {
        reach.insert(q);
        grew = true;
      }
    }
  }
  return reach;
}

// Process i is aware of round r of j: a path i -> ... -> j in the union of
// rounds r, r+1, ... of the trace. False when j skips round r.
inline bool aware_of(const IISTrace& t, ProcessId i, ProcessId j, int r) {
  if (r < 1 || r > t.length() || !t.participants(r).contains(j)) return false;
  if (i == j) return true;
  return reaching(union_graph(t, r, t.length()), j).contains(i);
}

// Processes whose first round i is aware of.
inline ProcSet participation_set(const IISTrace& t, ProcessId i) {
  ProcSet out;
  if (t.length() == 0) return out;
  auto g = union_graph(t, 1, t.length());
  for (ProcessId j : t.participants(1).members())
    if (i == j || reaching(g, j).contains(i)) out.insert(j);
  return out;
}

// Processes present in every round of [from, to].
inline ProcSet always_present(const IISTrace& t, int from, int to) {
  ProcSet s = ProcSet::all(t.n);
  for (int r = from; r <= to; ++r) s = s & t.participants(r);
  return s;
}

// Rounds [from, length] as a standalone trace.
inline IISTrace suffix(const IISTrace& t, int from) {
  IISTrace s;
  s.n = t.n;
  for (int r = std::max(from, 1); r <= t.length(); ++r) s.rounds.push_back(t.round(r));
  return s;
}

// ---------------------------------------------------------------------------
// IS axioms

enum class Axiom : std::uint8_t { self_inclusion, containment, immediacy };

inline const char* to_string(Axiom a) {
  switch (a) {
    case Axiom::self_inclusion: return "self-inclusion";
    case Axiom::containment: return "containment";
    case Axiom::immediacy: return "immediacy";
  }
  return "?";
}

struct AxiomViolation {
  Axiom axiom;
  ProcessId i;
  ProcessId j;
  bool operator==(const AxiomViolation&) const = default;
};

struct AxiomReport {
  std::vector<AxiomViolation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Axiom a, ProcessId i, ProcessId j) const {
    return std::find(violations.begin(), violations.end(), AxiomViolation{a, i, j}) != violations.end();
  }
  std::string describe() const {
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += std::string(to_string(v.axiom)) + " (" + std::to_string(v.i) + "," + std::to_string(v.j) + ")";
    }
    return s;
  }
};

// views[k] is process k+1's view; an empty view marks a non-participant.
inline AxiomReport check_is_axioms(const std::vector<View>& views) {
  AxiomReport rep;
  const int n = static_cast<int>(views.size());
  auto v = [&](ProcessId p) { return views[static_cast<std::size_t>(p - 1)]; };
  for (ProcessId i = 1; i <= n; ++i) {
    if (v(i).empty()) continue;
    if (!v(i).contains(i)) rep.violations.push_back({Axiom::self_inclusion, i, i});
    for (ProcessId j = 1; j <= n; ++j) {
      if (j == i || v(j).empty()) continue;
      if (i < j && !v(i).subset_of(v(j)) && !v(j).subset_of(v(i)))
        rep.violations.push_back({Axiom::containment, i, j});
      if (v(j).contains(i) && !v(i).subset_of(v(j))) rep.violations.push_back({Axiom::immediacy, i, j});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Strongly-correct processes on finite windows

struct WindowParams {
  int burn_in = 0;
  int width = 1;

  // burn-in 2n, width 2n + 12
  static WindowParams defaults(int n) { return {2 * n, 2 * n + 12}; }
};

// Strongly connected components by Tarjan's algorithm; comp[k] is the
// component index of process k+1 (or -1 for nodes outside `nodes`).
inline std::vector<int> strong_components(const Adjacency& g, ProcSet nodes) {
  const int n = static_cast<int>(g.size());
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
      comp(static_cast<std::size_t>(n), -1);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  int counter = 0, comps = 0;

  auto visit = [&](auto&& self, int v) -> void {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (ProcessId w1 : (g[v] & nodes).members()) {
      int w = w1 - 1;
      if (index[w] < 0) {
        self(self, w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = comps;
      } while (w != v);
      ++comps;
    }
  };
  for (ProcessId p : nodes.members())
    if (index[p - 1] < 0) visit(visit, p - 1);
  return comp;
}

// Members of the unique sink component of g restricted to `nodes`; empty when
// the condensation has several sinks.
inline ProcSet sink_component(const Adjacency& g, ProcSet nodes) {
  auto comp = strong_components(g, nodes);
  int comps = 0;
  for (int c : comp) comps = std::max(comps, c + 1);
  std::vector<bool> has_exit(static_cast<std::size_t>(comps), false);
  for (ProcessId p : nodes.members())
    for (ProcessId q : (g[p - 1] & nodes).members())
      if (comp[p - 1] != comp[q - 1]) has_exit[comp[p - 1]] = true;
  int sink = -1;
  for (int c = 0; c < comps; ++c) {
    if (has_exit[c]) continue;
    if (sink >= 0) return {};
    sink = c;
  }
  ProcSet out;
  for (ProcessId p : nodes.members())
    if (comp[p - 1] == sink) out.insert(p);
  return out;
}

struct WindowDisagreement {
  ProcessId process;
  int window_start;
  bool proposition_form;
  bool sink_form;
};

struct StronglyCorrectReport {
  ProcSet proposition_form;
  ProcSet sink_form;
  ProcSet candidates;  // present in every round after burn-in
  std::vector<WindowDisagreement> disagreements;

  bool agree() const { return disagreements.empty() && proposition_form == sink_form; }
};

// Evaluates both characterizations window by window:
//  - path form: every member of V_ir reaches i within [r, r+width);
//  - sink form: i lies in the sink component of that window's union graph
//    over the participants of round r.
// Throws InsufficientData when no complete window follows the burn-in.
inline StronglyCorrectReport strongly_correct_report(const IISTrace& t, WindowParams params) {
  if (params.width < 1) throw InvalidInput("window width must be >= 1");
  if (params.burn_in < 0) throw InvalidInput("burn-in must be >= 0");
  const int first = params.burn_in + 1;
  const int last_start = t.length() - params.width + 1;
  if (last_start < first) {
    throw InsufficientData("trace of " + std::to_string(t.length()) + " rounds is shorter than burn-in " +
                           std::to_string(params.burn_in) + " plus window " + std::to_string(params.width));
  }
  StronglyCorrectReport rep;
  rep.candidates = always_present(t, first, t.length());
  ProcSet path_ok = rep.candidates, sink_ok = rep.candidates;

  for (int r = first; r <= last_start; ++r) {
    Adjacency g = union_graph(t, r, r + params.width - 1);
    auto views = t.round(r).views(t.n);
    ProcSet sink = sink_component(g, t.participants(r));
    for (ProcessId i : rep.candidates.members()) {
      bool by_path = views[static_cast<std::size_t>(i - 1)].subset_of(reaching(g, i));
      bool by_sink = sink.contains(i);
      if (!by_path) path_ok.erase(i);
      if (!by_sink) sink_ok.erase(i);
      if (by_path != by_sink) rep.disagreements.push_back({i, r, by_path, by_sink});
    }
  }
  rep.proposition_form = path_ok;
  rep.sink_form = sink_ok;
  return rep;
}

// The window form of the strongly-correct set (path characterization).
inline ProcSet strongly_correct_window(const IISTrace& t, WindowParams params) {
  return strongly_correct_report(t, params).proposition_form;
}

struct CrosscheckReport {
  bool agree = true;
  ProcSet proposition_form;
  ProcSet sink_form;
  std::optional<WindowDisagreement> witness;
};

inline CrosscheckReport proposition1_crosscheck(const IISTrace& t, WindowParams params) {
  auto rep = strongly_correct_report(t, params);
  CrosscheckReport out;
  out.agree = rep.agree();
  out.proposition_form = rep.proposition_form;
  out.sink_form = rep.sink_form;
  if (!rep.disagreements.empty()) out.witness = rep.disagreements.front();
  return out;
}

}  // namespace iisim
