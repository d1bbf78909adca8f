#pragma once

// Exhaustive exploration of every interleaving of a kernel execution at
// one-primitive granularity. States are merged by a caller-supplied key, so
// each distinct state is expanded once; the number of interleavings reaching
// each terminal state is still counted.

#include <string>
#include <unordered_map>

#include "iisim/kernel.hpp"

namespace iisim {

struct ExploreStats {
  std::size_t states = 0;
  std::size_t terminal_states = 0;
  double interleavings = 0;  // complete schedules, counted with multiplicity
};

// key(ex) must identify the future behaviour of ex; on_terminal(ex) is called
// once per distinct state in which no process is enabled.
template <Protocol P, class KeyFn, class TerminalFn>
ExploreStats explore_all(const Executor<P>& start, KeyFn key, TerminalFn on_terminal) {
  ExploreStats stats;
  std::unordered_map<std::string, double> memo;
  auto visit = [&](auto&& self, const Executor<P>& ex) -> double {
    std::string k = key(ex);
    if (auto it = memo.find(k); it != memo.end()) return it->second;
    ++stats.states;
    double paths = 0;
    ProcSet enabled = ex.enabled();
    if (enabled.empty()) {
      ++stats.terminal_states;
      on_terminal(ex);
      paths = 1;
    } else {
      for (ProcessId p : enabled.members()) {
        Executor<P> next = ex;
        next.activate(p);
        paths += self(self, next);
      }
    }
    memo.emplace(std::move(k), paths);
    return paths;
  };
  stats.interleavings = visit(visit, start);
  return stats;
}

}  // namespace iisim
