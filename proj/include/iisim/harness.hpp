#pragma once

// Run configurations, trace construction, trace checkers and fuzz campaigns.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "iisim/analysis.hpp"
#include "iisim/as_to_iis.hpp"
#include "iisim/iis_to_as.hpp"
#include "iisim/schedule.hpp"
#include "iisim/script.hpp"
#include "iisim/trace_io.hpp"

namespace iisim {

struct RunConfig {
  int n = 3;
  Direction direction = Direction::as_to_iis;
  HelpMode mode = HelpMode::helping;
  std::optional<std::string> script;  // script text
  std::optional<std::uint64_t> seed;
  std::size_t horizon = 0;  // activations (as-to-iis) or rounds (iis-to-as)
  // Window overrides; unset fields take the defaults for n.
  std::optional<int> burn_in;
  std::optional<int> width;
  std::optional<int> output_width;
  double crash_prob = 0.0;  // seeded as-to-iis runs: per-process crash probability
  IISFuzzParams iis_fuzz;
};

inline void validate_config(const RunConfig& c) {
  if (c.horizon < 1) throw InvalidInput("horizon must be >= 1");
  if (c.mode == HelpMode::baseline && c.direction != Direction::iis_to_as)
    throw InvalidInput("baseline mode is only valid for iis-to-as");
  if (c.script.has_value() == c.seed.has_value()) throw InvalidInput("give exactly one of a schedule script or a seed");
  if (c.seed) check_system_size(c.n);
  if (c.crash_prob < 0.0 || c.crash_prob > 1.0) throw InvalidInput("crash probability must lie in [0, 1]");
  if (c.burn_in && *c.burn_in < 0) throw InvalidInput("burn-in must be >= 0");
  for (const auto& w : {c.width, c.output_width})
    if (w && *w < 1) throw InvalidInput("window width must be >= 1");
}

inline WindowParams resolve_window(const RunConfig& c, int n) {
  WindowParams d = WindowParams::defaults(n);
  return {c.burn_in.value_or(d.burn_in), c.width.value_or(d.width)};
}

inline WindowParams resolve_output_window(const RunConfig& c, int n) {
  WindowParams d = output_window_defaults(n);
  return {c.burn_in.value_or(d.burn_in), c.output_width.value_or(d.width)};
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << h;
  return ss.str();
}

struct RunResult {
  TraceFile trace;
  std::vector<std::string> faults;  // hard invariants that fired
  bool ok() const { return faults.empty(); }
};

// First publication of every simulated view, in publication order.
inline std::vector<ViewRecord> first_views(const std::vector<StatusRecord>& status) {
  std::vector<ViewRecord> out;
  std::set<std::pair<ProcessId, int>> seen;
  for (const auto& rec : status) {
    if (!rec.view) continue;
    const int r = rec.entry.at.round - 1;
    if (seen.insert({rec.process, r}).second) out.push_back({rec.process, r, *rec.view, rec.step});
  }
  return out;
}

inline SimOutput views_output(int n, const std::vector<ViewRecord>& views) {
  SimOutput out;
  out.n = n;
  out.views.resize(static_cast<std::size_t>(n));
  out.published_at.resize(static_cast<std::size_t>(n));
  for (const auto& v : views) {
    auto& vs = out.views[static_cast<std::size_t>(v.process - 1)];
    auto& at = out.published_at[static_cast<std::size_t>(v.process - 1)];
    if (static_cast<int>(vs.size()) < v.round) {
      vs.resize(static_cast<std::size_t>(v.round));
      at.resize(static_cast<std::size_t>(v.round), 0);
    }
    auto& slot = vs[static_cast<std::size_t>(v.round - 1)];
    if (!slot.empty() && slot != v.view) {
      out.conflicts.push_back("process " + std::to_string(v.process) + " round " + std::to_string(v.round) + ": " +
                              slot.str() + " vs " + v.view.str());
    }
    slot = v.view;
    at[static_cast<std::size_t>(v.round - 1)] = v.step;
  }
  return out;
}

inline RunResult run_simulation(const RunConfig& c) {
  validate_config(c);
  RunResult res;
  TraceMeta& m = res.trace.meta;
  m.direction = c.direction;
  m.mode = c.mode;
  m.seed = c.seed;
  if (c.script) m.script_hash = hash_hex(fnv1a(*c.script));
  m.horizon = c.horizon;

  if (c.direction == Direction::as_to_iis) {
    Schedule sched = [&] {
      if (c.script) {
        std::istringstream in(*c.script);
        ASScript s = parse_as_script(in, 0, "<schedule>");
        m.n = s.n;
        return s.schedule();
      }
      m.n = c.n;
      return Schedule::seeded(c.n, *c.seed, random_crashes(c.n, *c.seed, c.crash_prob, c.horizon / 2));
    }();
    m.window = resolve_window(c, m.n);
    auto art = run_as_to_iis(m.n, sched, c.horizon);
    m.steps = art.steps;
    m.crashes = sched.crashes();
    res.trace.register_events = std::move(art.as_trace);
    res.trace.event_steps = std::move(art.event_steps);
    res.trace.status = std::move(art.status);
    res.trace.views = first_views(res.trace.status);
    SimOutput out = views_output(m.n, res.trace.views);
    try {
      res.trace.rounds = extract_iis_trace(out, out.max_round()).rounds;
    } catch (const SimulationFault& e) {
      res.faults.push_back(std::string("simulated views: ") + e.what());
    }
  } else {
    IISTrace t;
    if (c.script) {
      std::istringstream in(*c.script);
      IISSchedule s = parse_iis_script(in, 0, "<schedule>");
      t = iis_run(s, static_cast<int>(std::min<std::size_t>(c.horizon, 1u << 30)));
    } else {
      t = random_iis_trace(c.n, static_cast<int>(c.horizon), *c.seed, c.iis_fuzz);
    }
    m.n = t.n;
    m.window = resolve_window(c, m.n);
    m.output_window = resolve_output_window(c, m.n);
    res.trace.rounds = t.rounds;
    auto sim = run_iis_to_as(t, c.mode);
    res.trace.outputs = sim.outputs;
    try {
      res.trace.value_events = extract_as_trace(m.n, sim.outputs);
    } catch (const SimulationFault& e) {
      res.faults.push_back(std::string("snapshot outputs: ") + e.what());
    }
  }
  res.trace.register_events.n = m.n;
  res.trace.value_events.n = m.n;
  return res;
}

// ---------------------------------------------------------------------------
// Checks

enum class Verdict : std::uint8_t { pass, fail, skip };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::skip: return "SKIP";
  }
  return "?";
}

struct CheckItem {
  std::string name;
  Verdict verdict = Verdict::pass;
  std::vector<std::string> details;
};

struct CheckReport {
  std::vector<CheckItem> items;

  bool ok() const {
    return std::none_of(items.begin(), items.end(), [](const CheckItem& i) { return i.verdict == Verdict::fail; });
  }
  const CheckItem* find(const std::string& name) const {
    for (const auto& i : items)
      if (i.name == name) return &i;
    return nullptr;
  }
  CheckItem& add(std::string name, std::vector<std::string> failures) {
    items.push_back({std::move(name), failures.empty() ? Verdict::pass : Verdict::fail, std::move(failures)});
    return items.back();
  }
  void skip(std::string name, std::string why) { items.push_back({std::move(name), Verdict::skip, {std::move(why)}}); }
};

namespace detail {

inline void add_crosscheck(CheckReport& rep, const IISTrace& t, WindowParams w) {
  try {
    auto cc = proposition1_crosscheck(t, w);
    std::vector<std::string> f;
    if (!cc.agree) {
      std::string msg = "path form " + cc.proposition_form.str() + " vs sink form " + cc.sink_form.str();
      if (cc.witness)
        msg += "; process " + std::to_string(cc.witness->process) + " in window at round " +
               std::to_string(cc.witness->window_start);
      f.push_back(msg);
    }
    rep.add("proposition1-crosscheck", std::move(f));
  } catch (const InsufficientData& e) {
    rep.skip("proposition1-crosscheck", e.what());
  }
}

inline std::string participation_detail(const std::vector<std::pair<ProcessId, ProcSet>>& mm, ProcSet expected) {
  std::string s;
  for (const auto& [i, part] : mm) {
    if (!s.empty()) s += "; ";
    s += "process " + std::to_string(i) + " aware of " + part.str() + ", expected " + expected.str();
  }
  return s;
}

inline CheckReport check_as_to_iis(const TraceFile& tf, WindowParams window) {
  CheckReport rep;
  const int n = tf.meta.n;

  std::vector<std::string> f;
  if (auto v = find_replay_violation(tf.register_events)) f.push_back(*v);
  if (tf.event_steps.size() != tf.register_events.events.size()) f.push_back("event steps missing");
  rep.add("register-replay", std::move(f));

  SimOutput out = views_output(n, tf.views);
  f.clear();
  for (const auto& c : out.conflicts) f.push_back("conflicting view records for " + c);
  if (first_views(tf.status) != tf.views) {
    auto expected = first_views(tf.status);
    std::size_t k = 0;
    while (k < expected.size() && k < tf.views.size() && expected[k] == tf.views[k]) ++k;
    f.push_back("view record " + std::to_string(k) + " differs from the status logs");
  }
  rep.add("views-match-status", std::move(f));

  auto safety = check_alg1_safety(out, tf.status);
  rep.add("is-axioms", safety.axiom_failures);
  rep.add("frontier-agreement", safety.agreement_failures);
  rep.add("level-occupancy", safety.occupancy_failures);

  f.clear();
  IISTrace extracted;
  try {
    extracted = extract_iis_trace(out, out.max_round());
    if (extracted.rounds != tf.rounds) f.push_back("iis_round records differ from the simulated views");
  } catch (const SimulationFault& e) {
    f.push_back(e.what());
  }
  rep.add("simulated-rounds", std::move(f));

  if (!safety.ok() || !rep.items.back().details.empty()) {
    rep.skip("theorem1-window", "safety failures");
    return rep;
  }

  AsToIisArtifacts art;
  art.n = n;
  art.horizon = tf.meta.horizon;
  art.steps = tf.meta.steps;
  for (const auto& [p, at] : tf.meta.crashes)
    if (at < art.steps) art.crashes[p] = at;
  for (const auto& ev : tf.register_events.events) art.stepped.insert(ev.actor);
  art.status = tf.status;
  auto t1 = check_theorem1(art, out, window);
  if (t1.sufficient) {
    std::vector<std::string> g;
    if (!t1.sets_equal)
      g.push_back("window strongly-correct " + t1.strongly_correct.str() + " vs non-crashed " + t1.live.str() +
                  " (suffix from round " + std::to_string(t1.suffix_start) + ")");
    rep.add("theorem1-window", std::move(g));
  } else {
    rep.skip("theorem1-window", t1.note);
  }
  std::vector<std::string> g;
  if (!t1.participation_mismatches.empty()) g.push_back(participation_detail(t1.participation_mismatches, t1.stepped));
  rep.add("participation", std::move(g));
  add_crosscheck(rep, extracted, window);
  return rep;
}

inline CheckReport check_iis_to_as(const TraceFile& tf, WindowParams window, WindowParams output_window) {
  CheckReport rep;
  const int n = tf.meta.n;
  IISTrace t = tf.iis_trace();
  std::vector<std::string> f;
  try {
    validate_iis_trace(t);
  } catch (const InvalidInput& e) {
    f.push_back(e.what());
  }
  rep.add("iis-trace", f);
  if (!f.empty()) return rep;

  f.clear();
  auto sim = run_iis_to_as(t, tf.meta.mode);
  if (sim.outputs != tf.outputs) f.push_back("sim_view records differ from a rerun of the simulation");
  rep.add("simulation-replay", std::move(f));

  auto sorted = tf.outputs;
  std::stable_sort(sorted.begin(), sorted.end(), [](const SnapshotOutput& a, const SnapshotOutput& b) {
    return a.snapshot.total() < b.snapshot.total();
  });
  std::vector<std::string> containment, unit;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const CounterVector prev = k == 0 ? CounterVector(static_cast<std::size_t>(n)) : sorted[k - 1].snapshot;
    const CounterVector& cur = sorted[k].snapshot;
    auto where = [&](const SnapshotOutput& o) {
      return "process " + std::to_string(o.process) + " round " + std::to_string(o.round);
    };
    if (!prev.leq(cur)) {
      if (k > 0 && containment.size() < 5)
        containment.push_back(where(sorted[k - 1]) + " " + prev.str() + " vs " + where(sorted[k]) + " " + cur.str());
      continue;
    }
    for (ProcessId i = 1; i <= n; ++i) {
      if (cur[i] != prev[i] && cur[i] != prev[i] + 1 && unit.size() < 5)
        unit.push_back(where(sorted[k]) + ": counter " + std::to_string(i) + " jumps " + std::to_string(prev[i]) +
                       " -> " + std::to_string(cur[i]));
    }
  }
  const bool ordered = containment.empty() && unit.empty();
  rep.add("containment", std::move(containment));
  rep.add("unit-increment", std::move(unit));

  if (ordered) {
    f.clear();
    if (extract_as_trace(n, tf.outputs) != tf.value_events) f.push_back("as_event records differ from the extraction");
    rep.add("as-extraction", std::move(f));
  } else {
    rep.skip("as-extraction", "outputs not totally ordered");
  }
  f.clear();
  if (auto v = find_replay_violation(tf.value_events)) f.push_back(*v);
  rep.add("as-replay", std::move(f));

  try {
    auto t2 = check_theorem2(t, tf.outputs, tf.value_events, window, output_window);
    std::vector<std::string> g;
    if (!t2.sets_equal)
      g.push_back("window strongly-correct " + t2.strongly_correct.str() + " vs outputting " + t2.output_live.str() +
                  " (suffix from round " + std::to_string(t2.suffix_start) + ")");
    rep.add("theorem2-window", std::move(g));
    g.clear();
    if (!t2.participation_mismatches.empty())
      g.push_back(participation_detail(t2.participation_mismatches, t2.as_participants));
    rep.add("participation", std::move(g));
  } catch (const InsufficientData& e) {
    rep.skip("theorem2-window", e.what());
  }
  add_crosscheck(rep, t, window);
  return rep;
}

}  // namespace detail

// Runs every checker applicable to the trace's direction. Window overrides
// replace the parameters recorded in the trace header.
inline CheckReport check_trace(const TraceFile& tf, std::optional<WindowParams> window = std::nullopt,
                               std::optional<WindowParams> output_window = std::nullopt) {
  const WindowParams w = window.value_or(tf.meta.window);
  if (tf.meta.direction == Direction::as_to_iis) return detail::check_as_to_iis(tf, w);
  return detail::check_iis_to_as(tf, w, output_window.value_or(tf.meta.output_window));
}

inline std::string format_report(const CheckReport& rep) {
  std::string s;
  for (const auto& item : rep.items) {
    s += std::string(to_string(item.verdict)) + "  " + item.name + "\n";
    for (const auto& d : item.details) s += "      " + d + "\n";
  }
  return s;
}

inline nlohmann::ordered_json report_json(const CheckReport& rep) {
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& item : rep.items)
    items.push_back({{"check", item.name}, {"verdict", to_string(item.verdict)}, {"details", item.details}});
  return {{"ok", rep.ok()}, {"checks", std::move(items)}};
}

// ---------------------------------------------------------------------------
// Fuzz campaigns

struct FuzzCase {
  Direction direction;
  std::uint64_t seed;
  std::vector<std::string> failures;
};

struct FuzzSummary {
  std::vector<FuzzCase> cases;
  std::size_t failed() const {
    return static_cast<std::size_t>(
        std::count_if(cases.begin(), cases.end(), [](const FuzzCase& c) { return !c.failures.empty(); }));
  }
};

// One fuzz case: run, serialize, parse back, check.
inline FuzzCase fuzz_one(RunConfig cfg) {
  FuzzCase fc{cfg.direction, *cfg.seed, {}};
  try {
    auto res = run_simulation(cfg);
    fc.failures = res.faults;
    const std::string text = trace_to_string(res.trace);
    TraceFile back = trace_from_string(text);
    if (!(back == res.trace)) fc.failures.push_back("trace does not round-trip");
    auto rep = check_trace(back);
    for (const auto& item : rep.items)
      if (item.verdict == Verdict::fail)
        fc.failures.push_back(item.name + (item.details.empty() ? "" : ": " + item.details.front()));
  } catch (const SimulationFault& e) {
    fc.failures.push_back(std::string("simulation fault: ") + e.what());
  }
  return fc;
}

inline FuzzSummary fuzz(const RunConfig& base, std::uint64_t first_seed, std::uint64_t last_seed,
                        const std::vector<Direction>& directions) {
  FuzzSummary sum;
  for (Direction d : directions) {
    for (std::uint64_t s = first_seed; s <= last_seed; ++s) {
      RunConfig cfg = base;
      cfg.direction = d;
      cfg.seed = s;
      cfg.script.reset();
      if (d == Direction::as_to_iis) cfg.mode = HelpMode::helping;
      sum.cases.push_back(fuzz_one(cfg));
    }
  }
  return sum;
}

}  // namespace iisim
