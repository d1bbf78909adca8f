#pragma once

// Shared helpers for the unit and acceptance suites.

#include <string>
#include <vector>

#include "iisim/agreement.hpp"
#include "iisim/analysis.hpp"
#include "iisim/explore.hpp"
#include "iisim/immediate_snapshot.hpp"

namespace iisim::test_support {

inline std::string is_state_key(const Executor<ImmediateSnapshotProcess>& ex) {
  std::string k;
  for (const auto& p : ex.processes()) {
    auto op = p.pending();
    k += static_cast<char>(p.level());
    k += static_cast<char>(!op ? 0 : std::holds_alternative<SnapshotOp>(*op) ? 1 : 2);
    k += static_cast<char>(p.output() ? p.output()->view.mask() : 0xff);
  }
  for (const auto& c : ex.memory().cells()) k += static_cast<char>(c ? c->level : 0);
  return k;
}

// Path identity: the sequence of actors so far.
template <class P>
std::string history_key(const Executor<P>& ex) {
  std::string k;
  for (const auto& ev : ex.memory().trace().events) k += static_cast<char>(ev.actor);
  return k;
}

struct ISOutcomeCheck {
  std::size_t checked = 0;
  std::vector<std::string> failures;

  void operator()(const std::vector<ImmediateSnapshotProcess>& procs, int n) {
    ++checked;
    std::vector<View> views(static_cast<std::size_t>(n));
    for (ProcessId p = 1; p <= n; ++p) {
      const auto& proc = procs[static_cast<std::size_t>(p - 1)];
      if (!proc.invoked()) continue;
      if (!proc.output()) {
        failures.push_back("process " + std::to_string(p) + " did not return");
        return;
      }
      views[static_cast<std::size_t>(p - 1)] = proc.output()->view;
      for (ProcessId j : proc.output()->view.members())
        if (proc.output()->values[static_cast<std::size_t>(j - 1)] != j) failures.push_back("wrong value for " + std::to_string(j));
    }
    auto rep = check_is_axioms(views);
    if (!rep.ok()) failures.push_back(rep.describe());
    else if (!partition_from_views(views)) failures.push_back("views form no ordered partition");
  }
};

}  // namespace iisim::test_support
