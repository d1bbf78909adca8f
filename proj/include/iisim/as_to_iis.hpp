#pragma once

// AS -> IIS: every AS process runs a simulator that drives all simulated
// processes through the levels of the per-round IS construction. Each simulated
// step is agreed through a RAP instance indexed by (process, round, level).
// Simulators promote the most-behind process that is neither blocked nor
// frozen; a process is frozen once everybody in its latest view is aware of
// that round, until its own simulator takes another step.
//
// Shared state lives in one single-writer register per simulator: the step
// counter, the status logs it has appended for every simulated process, and
// its RAP fields. Logs and RAP fields are append-only, so a register value is
// a set of prefix lengths into its owner's append-only store.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "iisim/agreement.hpp"
#include "iisim/analysis.hpp"
#include "iisim/core.hpp"
#include "iisim/immediate_snapshot.hpp"
#include "iisim/kernel.hpp"

namespace iisim {

struct LogRecord {
  StatusEntry entry;
  std::optional<View> completed;  // V_pr, carried by the (run, r+1, n) entry
};

struct RapFields {
  std::optional<bool> proposal;
  std::size_t proposal_pos = 0;
  std::optional<GradedValue> graded;
  std::size_t graded_pos = 0;
  std::optional<bool> resolution;
  std::size_t resolution_pos = 0;
};

inline std::uint64_t rap_key(ProcessId p, RoundLevel at) {
  return (static_cast<std::uint64_t>(at.round) << 16) | (static_cast<std::uint64_t>(at.level) << 8) |
         static_cast<std::uint64_t>(p);
}

// Append-only storage owned by one simulator.
struct SimulatorStore {
  std::vector<std::vector<LogRecord>> logs;  // by simulated process
  std::size_t rap_writes = 0;
  std::unordered_map<std::uint64_t, RapFields> rap;
};

// Serializable content of a simulator register.
struct RegisterSummary {
  std::uint64_t counter = 0;
  std::vector<std::uint32_t> log_lengths;
  std::uint32_t rap_length = 0;
  bool operator==(const RegisterSummary&) const = default;
};

struct SimRegister {
  std::uint64_t counter = 0;
  std::vector<std::uint32_t> log_lengths;
  std::uint32_t rap_length = 0;
  std::shared_ptr<const SimulatorStore> store;

  std::size_t log_length(ProcessId p) const { return log_lengths[static_cast<std::size_t>(p - 1)]; }
  const LogRecord& record(ProcessId p, std::size_t k) const {
    return store->logs[static_cast<std::size_t>(p - 1)][k];
  }
  // Visible RAP fields of this register for one instance.
  const RapFields* rap_fields(std::uint64_t key) const {
    auto it = store->rap.find(key);
    return it == store->rap.end() ? nullptr : &it->second;
  }
  RegisterSummary summary() const { return {counter, log_lengths, rap_length}; }

  bool operator==(const SimRegister& o) const {
    return counter == o.counter && log_lengths == o.log_lengths && rap_length == o.rap_length &&
           store.get() == o.store.get();
  }
};

// ---------------------------------------------------------------------------
// Knowledge a simulator derives from its snapshots. Logs are append-only and
// snapshots grow over time, so new records are folded in incrementally.

class BoardKnowledge {
 public:
  explicit BoardKnowledge(int n)
      : n_(n),
        consumed_(static_cast<std::size_t>(n * n), 0),
        frontier_(static_cast<std::size_t>(n)),
        known_(static_cast<std::size_t>(n), false),
        min_level_(static_cast<std::size_t>(n)),
        views_(static_cast<std::size_t>(n)),
        counters_(static_cast<std::size_t>(n), 0),
        image_(static_cast<std::size_t>(n)) {}

  void ingest(const MemoryImage<SimRegister>& image) {
    image_ = image;
    for (ProcessId owner = 1; owner <= n_; ++owner) {
      const auto& cell = image[static_cast<std::size_t>(owner - 1)];
      if (!cell) continue;
      counters_[static_cast<std::size_t>(owner - 1)] = cell->counter;
      for (ProcessId p = 1; p <= n_; ++p) {
        auto& done = consumed_[index(owner, p)];
        for (; done < cell->log_length(p); ++done) fold(p, cell->record(p, done));
      }
    }
  }

  // Last snapshot passed to ingest().
  const MemoryImage<SimRegister>& image() const { return image_; }

  bool participates(ProcessId p) const { return known_[static_cast<std::size_t>(p - 1)]; }
  RoundLevel frontier(ProcessId p) const { return frontier_[static_cast<std::size_t>(p - 1)]; }
  std::uint64_t counter(ProcessId p) const { return counters_[static_cast<std::size_t>(p - 1)]; }

  // Latest entry appended by `owner` for `p` in the last snapshot.
  std::optional<StatusEntry> tail(ProcessId owner, ProcessId p) const {
    const auto& cell = image()[static_cast<std::size_t>(owner - 1)];
    if (!cell || cell->log_length(p) == 0) return std::nullopt;
    return cell->record(p, cell->log_length(p) - 1).entry;
  }

  // Blocked: every simulator whose latest entry for p sits at p's frontier
  // recorded it as blocked.
  bool blocked(ProcessId p) const {
    if (!participates(p)) return false;
    const RoundLevel f = frontier(p);
    bool any = false;
    for (ProcessId owner = 1; owner <= n_; ++owner) {
      auto t = tail(owner, p);
      if (!t || t->at != f) continue;
      if (t->disposition != Disposition::blocked) return false;
      any = true;
    }
    return any;
  }

  // Processes whose history reaches (r, l).
  ProcSet reached(RoundLevel at) const {
    ProcSet s;
    for (ProcessId j = 1; j <= n_; ++j) {
      const auto& ml = min_level_[static_cast<std::size_t>(j - 1)];
      if (at.round <= static_cast<int>(ml.size()) && ml[static_cast<std::size_t>(at.round - 1)] <= at.level)
        s.insert(j);
    }
    return s;
  }

  std::optional<View> view(ProcessId p, int r) const {
    const auto& v = views_[static_cast<std::size_t>(p - 1)];
    if (r < 1 || r > static_cast<int>(v.size()) || v[static_cast<std::size_t>(r - 1)].empty()) return std::nullopt;
    return v[static_cast<std::size_t>(r - 1)];
  }
  int last_completed(ProcessId p) const { return static_cast<int>(views_[static_cast<std::size_t>(p - 1)].size()); }
  int max_round() const {
    int m = 0;
    for (ProcessId p = 1; p <= n_; ++p) m = std::max(m, last_completed(p));
    return m;
  }

  // Visible content of RAP instance `key` in the last snapshot.
  InstanceView instance(std::uint64_t key, ProcessId resolver) const {
    InstanceView v;
    v.proposals.resize(static_cast<std::size_t>(n_));
    v.graded.resize(static_cast<std::size_t>(n_));
    for (ProcessId owner = 1; owner <= n_; ++owner) {
      const auto& cell = image()[static_cast<std::size_t>(owner - 1)];
      if (!cell) continue;
      const RapFields* f = cell->rap_fields(key);
      if (!f) continue;
      if (f->proposal && f->proposal_pos < cell->rap_length)
        v.proposals[static_cast<std::size_t>(owner - 1)] = f->proposal;
      if (f->graded && f->graded_pos < cell->rap_length) v.graded[static_cast<std::size_t>(owner - 1)] = f->graded;
      if (owner == resolver && f->resolution && f->resolution_pos < cell->rap_length) v.resolution = f->resolution;
    }
    return v;
  }

  // Largest completed round x of j such that every member of V_jx is aware of
  // round x of j; only rounds above `floor` are considered.
  std::optional<int> latest_acknowledged_round(ProcessId j, int floor) const {
    const int top = max_round();
    std::vector<ProcSet> out(static_cast<std::size_t>(n_));
    for (int x = top; x > floor; --x) {
      for (ProcessId q = 1; q <= n_; ++q)
        if (auto v = view(q, x)) out[static_cast<std::size_t>(q - 1)] |= *v;
      auto vj = view(j, x);
      if (!vj) continue;
      if (vj->subset_of(reaching(out, j))) return x;
    }
    return std::nullopt;
  }

 private:
  std::size_t index(ProcessId owner, ProcessId p) const {
    return static_cast<std::size_t>((owner - 1) * n_ + (p - 1));
  }

  void fold(ProcessId p, const LogRecord& rec) {
    const auto k = static_cast<std::size_t>(p - 1);
    const RoundLevel at = rec.entry.at;
    if (!known_[k] || progress_order(frontier_[k], at) < 0) frontier_[k] = at;
    known_[k] = true;
    auto& ml = min_level_[k];
    if (static_cast<int>(ml.size()) < at.round) ml.resize(static_cast<std::size_t>(at.round), n_ + 1);
    auto& slot = ml[static_cast<std::size_t>(at.round - 1)];
    slot = std::min(slot, at.level);
    if (rec.completed) {
      const int r = at.round - 1;
      auto& vs = views_[k];
      if (static_cast<int>(vs.size()) < r) vs.resize(static_cast<std::size_t>(r));
      vs[static_cast<std::size_t>(r - 1)] = *rec.completed;
    }
  }

  int n_;
  std::vector<std::size_t> consumed_;
  std::vector<RoundLevel> frontier_;
  std::vector<bool> known_;
  std::vector<std::vector<int>> min_level_;
  std::vector<std::vector<View>> views_;
  std::vector<std::uint64_t> counters_;
  MemoryImage<SimRegister> image_;
};

// The most-behind participating process that is neither blocked, frozen
// (counter not past `countf`) nor in `excluded`.
inline std::optional<ProcessId> select_candidate(const BoardKnowledge& k, const std::vector<std::uint64_t>& countf,
                                                 ProcSet excluded) {
  const int n = static_cast<int>(countf.size());
  std::optional<ProcessId> best;
  for (ProcessId j = 1; j <= n; ++j) {
    if (!k.participates(j) || k.counter(j) == 0 || excluded.contains(j) || k.blocked(j)) continue;
    if (k.counter(j) <= countf[static_cast<std::size_t>(j - 1)]) continue;
    if (!best || compare_round_level(j, k.frontier(j), *best, k.frontier(*best), n) < 0) best = j;
  }
  return best;
}

// ---------------------------------------------------------------------------

// The simulator run by AS process `self`. Copies share the append-only store,
// so a simulator must not be copied while it still runs.
class Simulator {
 public:
  using value_type = SimRegister;

  Simulator(int n, ProcessId self)
      : n_(n),
        self_(self),
        store_(std::make_shared<SimulatorStore>()),
        knowledge_(n),
        countf_(static_cast<std::size_t>(n), 0),
        lastf_(static_cast<std::size_t>(n), 0) {
    check_system_size(n);
    check_process(self, n);
    store_->logs.resize(static_cast<std::size_t>(n));
    published_.log_lengths.assign(static_cast<std::size_t>(n), 0);
    published_.store = store_;
    // Register participation at the top level of the first round.
    append_log(self_, {{Disposition::run, {1, n_}}, std::nullopt});
    stage(1);
    phase_ = Phase::init;
  }

  std::optional<Primitive<value_type>> pending() const {
    switch (phase_) {
      case Phase::snapshot:
      case Phase::cand_snapshot: return SnapshotOp{};
      case Phase::rap:
        if (is_write(rap_->step())) return WriteOp<value_type>{staged_};
        return SnapshotOp{};
      default: return WriteOp<value_type>{staged_};
    }
  }

  void on_write_done() {
    published_ = staged_;
    switch (phase_) {
      case Phase::init:
      case Phase::append:
        ++stats_.iterations;
        stage(published_.counter + 1);
        phase_ = Phase::bump;
        break;
      case Phase::bump: phase_ = Phase::snapshot; break;
      case Phase::cand_bump:
        if (chosen_) begin_drive(*chosen_);
        else phase_ = Phase::cand_snapshot;
        break;
      case Phase::rap:
        rap_->wrote();
        continue_rap();
        break;
      default: throw SimulationFault("simulator: write completed in a read phase");
    }
  }

  void on_snapshot(const MemoryImage<value_type>& image) {
    knowledge_.ingest(image);
    switch (phase_) {
      case Phase::snapshot:
        if (knowledge_.blocked(self_)) {
          ++stats_.self_resolutions;
          begin_drive(self_);
          return;
        }
        freeze_scan();
        select_and_bump();
        break;
      case Phase::cand_snapshot:
        if (knowledge_.blocked(self_)) {
          ++stats_.self_resolutions;
          begin_drive(self_);
          return;
        }
        select_and_bump();
        break;
      case Phase::rap:
        rap_->observe(knowledge_.instance(rap_key(target_, at_), target_));
        continue_rap();
        break;
      default: throw SimulationFault("simulator: snapshot completed in a write phase");
    }
  }

  struct Stats {
    std::uint64_t iterations = 0;
    std::uint64_t empty_candidate_rounds = 0;
    std::uint64_t self_resolutions = 0;
    std::uint64_t bottoms = 0;
    std::uint64_t freezes = 0;
    std::uint64_t max_primitives_per_drive = 0;
  };

  ProcessId self() const { return self_; }
  const Stats& stats() const { return stats_; }
  const BoardKnowledge& knowledge() const { return knowledge_; }
  const SimRegister& published() const { return published_; }

  // Exposed for tests of the scan/selection rules on a given snapshot.
  std::uint64_t frozen_counter(ProcessId j) const { return countf_[static_cast<std::size_t>(j - 1)]; }
  int frozen_round(ProcessId j) const { return lastf_[static_cast<std::size_t>(j - 1)]; }

 private:
  enum class Phase : std::uint8_t { init, bump, snapshot, cand_bump, cand_snapshot, rap, append };

  static bool is_write(RapParticipant::Step s) {
    return s == RapParticipant::Step::write_proposal || s == RapParticipant::Step::write_graded ||
           s == RapParticipant::Step::write_resolution;
  }

  void append_log(ProcessId p, LogRecord rec) { store_->logs[static_cast<std::size_t>(p - 1)].push_back(std::move(rec)); }

  // Stages the next register value from the store's current extent.
  void stage(std::uint64_t counter) {
    staged_.counter = counter;
    staged_.log_lengths.resize(static_cast<std::size_t>(n_));
    for (ProcessId p = 1; p <= n_; ++p)
      staged_.log_lengths[static_cast<std::size_t>(p - 1)] =
          static_cast<std::uint32_t>(store_->logs[static_cast<std::size_t>(p - 1)].size());
    staged_.rap_length = static_cast<std::uint32_t>(store_->rap_writes);
    staged_.store = store_;
  }

  // Freezes every process with a newly acknowledged completed round.
  void freeze_scan() {
    for (ProcessId j = 1; j <= n_; ++j) {
      auto& lastf = lastf_[static_cast<std::size_t>(j - 1)];
      auto x = knowledge_.latest_acknowledged_round(j, lastf);
      if (x && *x > lastf) {
        lastf = *x;
        countf_[static_cast<std::size_t>(j - 1)] = knowledge_.counter(j);
        ++stats_.freezes;
      }
    }
  }

  // This simulator already got bottom from the instance at p's frontier and
  // the resolution is still unknown.
  bool stalled_here(ProcessId p) const {
    const RoundLevel f = knowledge_.frontier(p);
    auto mine = knowledge_.tail(self_, p);
    if (!mine || mine->disposition != Disposition::blocked || mine->at != f) return false;
    return !knowledge_.instance(rap_key(p, f), p).resolution.has_value();
  }

  void select_and_bump() {
    ProcSet stalled;
    for (ProcessId j = 1; j <= n_; ++j)
      if (knowledge_.participates(j) && stalled_here(j)) stalled.insert(j);
    chosen_ = select_candidate(knowledge_, countf_, stalled);
    if (!chosen_) ++stats_.empty_candidate_rounds;
    stage(published_.counter + 1);
    phase_ = Phase::cand_bump;
  }

  void begin_drive(ProcessId p) {
    target_ = p;
    at_ = knowledge_.frontier(p);
    drive_primitives_ = 0;
    const std::uint64_t key = rap_key(p, at_);
    if (proposed_.contains(key)) {
      // Already proposed here: re-read the resolution instead of proposing twice.
      finish_drive(knowledge_.instance(key, p).resolution);
      return;
    }
    proposed_.insert(key);
    const bool full = knowledge_.reached(at_).size() == at_.level;
    rap_.emplace(p == self_, full);
    phase_ = Phase::rap;
    stage_rap_write();
  }

  void stage_rap_write() {
    if (!is_write(rap_->step())) return;
    auto& f = store_->rap[rap_key(target_, at_)];
    switch (rap_->step()) {
      case RapParticipant::Step::write_proposal:
        f.proposal = rap_->proposal();
        f.proposal_pos = store_->rap_writes++;
        break;
      case RapParticipant::Step::write_graded:
        f.graded = rap_->graded();
        f.graded_pos = store_->rap_writes++;
        break;
      default:
        f.resolution = rap_->resolution_value();
        f.resolution_pos = store_->rap_writes++;
        break;
    }
    stage(published_.counter);
  }

  void continue_rap() {
    ++drive_primitives_;
    if (rap_->finished()) {
      RapResult v = rap_->result();
      rap_.reset();
      finish_drive(v);
      return;
    }
    stage_rap_write();
  }

  void finish_drive(RapResult v) {
    stats_.max_primitives_per_drive = std::max(stats_.max_primitives_per_drive, drive_primitives_ + 1);
    LogRecord rec;
    if (!v) {
      ++stats_.bottoms;
      rec.entry = {Disposition::blocked, at_};
      auto mine = knowledge_.tail(self_, target_);
      if (mine && *mine == rec.entry) {
        stage(published_.counter + 1);
        ++stats_.iterations;
        phase_ = Phase::bump;
        return;
      }
    } else if (*v) {
      // Every registration at (r, l) precedes the decision, so the latest
      // snapshot shows all l members.
      ProcSet members = knowledge_.reached(at_);
      if (members.size() != at_.level) {
        throw SimulationFault("process " + std::to_string(target_) + " completes round " +
                              std::to_string(at_.round) + " at level " + std::to_string(at_.level) +
                              " with view " + members.str());
      }
      rec.entry = {Disposition::run, {at_.round + 1, n_}};
      rec.completed = members;
    } else {
      if (at_.level == 1) throw SimulationFault("descent below level 1 for process " + std::to_string(target_));
      rec.entry = {Disposition::run, {at_.round, at_.level - 1}};
    }
    append_log(target_, std::move(rec));
    stage(published_.counter);
    phase_ = Phase::append;
  }

  int n_;
  ProcessId self_;
  std::shared_ptr<SimulatorStore> store_;
  SimRegister staged_;
  SimRegister published_;
  BoardKnowledge knowledge_;
  std::vector<std::uint64_t> countf_;
  std::vector<int> lastf_;
  Phase phase_ = Phase::init;
  std::optional<ProcessId> chosen_;
  ProcessId target_ = 1;
  RoundLevel at_;
  std::optional<RapParticipant> rap_;
  std::unordered_set<std::uint64_t> proposed_;
  std::uint64_t drive_primitives_ = 0;
  Stats stats_;
};

inline std::vector<Simulator> make_simulators(int n) {
  std::vector<Simulator> sims;
  for (ProcessId i = 1; i <= n; ++i) sims.emplace_back(n, i);
  return sims;
}

// ---------------------------------------------------------------------------
// Run artifacts and checks

struct StatusRecord {
  ProcessId simulator = 1;
  ProcessId process = 1;
  StatusEntry entry;
  std::optional<View> view;
  std::size_t step = 0;  // activation that published the record
  bool operator==(const StatusRecord&) const = default;
};

struct AsToIisArtifacts {
  int n = 0;
  std::size_t horizon = 0;
  std::size_t steps = 0;
  std::map<ProcessId, std::size_t> crashes;  // crash activation, only for crashes that happened
  ProcSet stepped;                           // processes with at least one activation
  std::vector<StatusRecord> status;          // publication order
  ASTrace<RegisterSummary> as_trace;
  std::vector<std::size_t> event_steps;      // activation index of each AS event
  std::vector<Simulator::Stats> stats;

  ProcSet crashed() const {
    ProcSet s;
    for (const auto& [p, at] : crashes) s.insert(p);
    return s;
  }
  ProcSet live() const { return stepped - crashed(); }
};

// Views per simulated process and round: views[p-1][r-1], empty if absent.
struct SimOutput {
  int n = 0;
  std::vector<std::vector<View>> views;
  std::vector<std::vector<std::size_t>> published_at;
  std::vector<std::string> conflicts;  // distinct views recorded for one (p, r)

  std::optional<View> view(ProcessId p, int r) const {
    const auto& v = views[static_cast<std::size_t>(p - 1)];
    if (r < 1 || r > static_cast<int>(v.size()) || v[static_cast<std::size_t>(r - 1)].empty()) return std::nullopt;
    return v[static_cast<std::size_t>(r - 1)];
  }
  int rounds_completed(ProcessId p) const { return static_cast<int>(views[static_cast<std::size_t>(p - 1)].size()); }
  int max_round() const {
    int m = 0;
    for (const auto& v : views) m = std::max(m, static_cast<int>(v.size()));
    return m;
  }
};

inline SimOutput collect_views(int n, const std::vector<StatusRecord>& status) {
  SimOutput out;
  out.n = n;
  out.views.resize(static_cast<std::size_t>(n));
  out.published_at.resize(static_cast<std::size_t>(n));
  for (const auto& rec : status) {
    if (!rec.view) continue;
    const int r = rec.entry.at.round - 1;
    auto& vs = out.views[static_cast<std::size_t>(rec.process - 1)];
    auto& at = out.published_at[static_cast<std::size_t>(rec.process - 1)];
    if (static_cast<int>(vs.size()) < r) {
      vs.resize(static_cast<std::size_t>(r));
      at.resize(static_cast<std::size_t>(r), 0);
    }
    auto& slot = vs[static_cast<std::size_t>(r - 1)];
    if (slot.empty()) {
      slot = *rec.view;
      at[static_cast<std::size_t>(r - 1)] = rec.step;
    } else if (slot != *rec.view) {
      out.conflicts.push_back("process " + std::to_string(rec.process) + " round " + std::to_string(r) + ": " +
                              slot.str() + " vs " + rec.view->str());
    }
  }
  return out;
}

// Runs n simulators under the schedule and collects the published state.
inline AsToIisArtifacts run_as_to_iis(int n, Schedule schedule, std::size_t horizon) {
  std::vector<std::size_t> event_steps;
  ProcSet stepped;
  auto rec = run(make_simulators(n), schedule, horizon,
                 [&](std::size_t step, const ASEvent<SimRegister>* ev) {
                   if (!ev) return;
                   event_steps.push_back(step);
                   stepped.insert(ev->actor);
                 });

  AsToIisArtifacts art;
  art.n = n;
  art.horizon = horizon;
  art.steps = rec.steps;
  art.stepped = stepped;
  for (const auto& [p, at] : schedule.crashes())
    if (at < rec.steps) art.crashes[p] = at;
  art.event_steps = std::move(event_steps);
  art.as_trace.n = n;

  std::vector<std::vector<std::uint32_t>> seen(static_cast<std::size_t>(n),
                                               std::vector<std::uint32_t>(static_cast<std::size_t>(n), 0));
  for (std::size_t k = 0; k < rec.as_trace.events.size(); ++k) {
    const auto& ev = rec.as_trace.events[k];
    if (const auto* up = std::get_if<Update<SimRegister>>(&ev.op)) {
      const SimRegister& reg = up->value;
      auto& lens = seen[static_cast<std::size_t>(ev.actor - 1)];
      for (ProcessId p = 1; p <= n; ++p) {
        for (auto i = lens[static_cast<std::size_t>(p - 1)]; i < reg.log_length(p); ++i) {
          const auto& lr = reg.record(p, i);
          art.status.push_back({ev.actor, p, lr.entry, lr.completed, art.event_steps[k]});
        }
        lens[static_cast<std::size_t>(p - 1)] = static_cast<std::uint32_t>(reg.log_length(p));
      }
      art.as_trace.events.push_back({ev.actor, Update<RegisterSummary>{reg.summary()}});
    } else {
      SnapshotResult<RegisterSummary> snap;
      for (const auto& cell : std::get<SnapshotResult<SimRegister>>(ev.op).cells)
        snap.cells.push_back(cell ? std::optional<RegisterSummary>(cell->summary()) : std::nullopt);
      art.as_trace.events.push_back({ev.actor, std::move(snap)});
    }
  }
  for (const auto& sim : rec.processes) art.stats.push_back(sim.stats());
  return art;
}

// Rebuilds the simulated IIS run from the views of rounds 1..rounds. Throws
// SimulationFault when a round's views are not those of an ordered partition.
inline IISTrace extract_iis_trace(const SimOutput& out, int rounds) {
  IISTrace t;
  t.n = out.n;
  for (int r = 1; r <= rounds; ++r) {
    std::vector<View> views(static_cast<std::size_t>(out.n));
    bool any = false;
    for (ProcessId p = 1; p <= out.n; ++p) {
      if (auto v = out.view(p, r)) {
        views[static_cast<std::size_t>(p - 1)] = *v;
        any = true;
      }
    }
    if (!any) break;
    auto rep = check_is_axioms(views);
    if (!rep.ok()) throw SimulationFault("round " + std::to_string(r) + ": " + rep.describe());
    auto part = partition_from_views(views);
    if (!part) throw SimulationFault("round " + std::to_string(r) + ": views form no ordered partition");
    t.rounds.push_back(*part);
  }
  return t;
}

struct Alg1SafetyReport {
  std::vector<std::string> axiom_failures;
  std::vector<std::string> agreement_failures;
  std::vector<std::string> occupancy_failures;
  int rounds = 0;

  bool ok() const { return axiom_failures.empty() && agreement_failures.empty() && occupancy_failures.empty(); }
};

// Per-round IS axioms on simulated views, agreement on every frontier
// transition, and the level occupancy bound.
inline Alg1SafetyReport check_alg1_safety(const SimOutput& out, const std::vector<StatusRecord>& status) {
  Alg1SafetyReport rep;
  const int n = out.n;
  rep.rounds = out.max_round();
  for (const auto& c : out.conflicts) rep.agreement_failures.push_back("conflicting views for " + c);

  for (int r = 1; r <= rep.rounds; ++r) {
    std::vector<View> views(static_cast<std::size_t>(n));
    for (ProcessId p = 1; p <= n; ++p)
      if (auto v = out.view(p, r)) views[static_cast<std::size_t>(p - 1)] = *v;
    auto ax = check_is_axioms(views);
    if (!ax.ok()) rep.axiom_failures.push_back("round " + std::to_string(r) + ": " + ax.describe());
  }

  // Lowest level each process reached per round, from every recorded entry.
  std::map<std::pair<ProcessId, int>, int> lowest;
  for (const auto& rec : status) {
    auto key = std::make_pair(rec.process, rec.entry.at.round);
    auto it = lowest.find(key);
    if (it == lowest.end()) lowest.emplace(key, rec.entry.at.level);
    else it->second = std::min(it->second, rec.entry.at.level);
    // A descent to l-1 means RAP_{p,r,l} decided 0, which contradicts
    // completing round r at level l.
    if (rec.entry.disposition == Disposition::run && rec.entry.at.level < n) {
      if (auto v = out.view(rec.process, rec.entry.at.round); v && v->size() > rec.entry.at.level) {
        rep.agreement_failures.push_back("process " + std::to_string(rec.process) + " round " +
                                         std::to_string(rec.entry.at.round) + " both completes at level " +
                                         std::to_string(v->size()) + " and descends to level " +
                                         std::to_string(rec.entry.at.level));
      }
    }
  }
  for (const auto& [key, level] : lowest) {
    if (auto v = out.view(key.first, key.second); v && level < v->size()) {
      rep.agreement_failures.push_back("process " + std::to_string(key.first) + " round " +
                                       std::to_string(key.second) + " completes at level " +
                                       std::to_string(v->size()) + " but reached level " + std::to_string(level));
    }
  }
  std::map<std::pair<int, int>, ProcSet> occupancy;  // (round, level) -> processes that reached it
  for (const auto& [key, level] : lowest)
    for (int l = level; l <= n; ++l) occupancy[{key.second, l}].insert(key.first);
  for (const auto& [rl, who] : occupancy) {
    if (who.size() > rl.second) {
      rep.occupancy_failures.push_back("round " + std::to_string(rl.first) + " level " + std::to_string(rl.second) +
                                       " reached by " + who.str());
    }
  }
  return rep;
}

inline Alg1SafetyReport check_alg1_safety(int n, const std::vector<StatusRecord>& status) {
  return check_alg1_safety(collect_views(n, status), status);
}

struct Theorem1Report {
  ProcSet live;
  ProcSet stepped;
  ProcSet strongly_correct;
  int suffix_start = 1;
  int common_rounds = 0;
  bool sufficient = false;
  bool sets_equal = false;
  std::vector<std::pair<ProcessId, ProcSet>> participation_mismatches;
  std::string note;

  bool ok() const { return sufficient && sets_equal && participation_mismatches.empty(); }
};

// Window check of correct(E) = str-correct(E') and of participation sets.
// The simulated trace is cut at the last round completed by every live
// process; windows start after the round in progress at the last crash.
inline Theorem1Report check_theorem1(const AsToIisArtifacts& art, const SimOutput& out, WindowParams params) {
  Theorem1Report rep;
  rep.live = art.live();
  rep.stepped = art.stepped;

  int common = out.max_round();
  for (ProcessId p : rep.live.members()) common = std::min(common, out.rounds_completed(p));
  rep.common_rounds = common;
  IISTrace trace = extract_iis_trace(out, common);

  if (!art.crashes.empty()) {
    std::size_t last_crash = 0;
    for (const auto& [p, at] : art.crashes) last_crash = std::max(last_crash, at);
    int in_progress = 0;
    for (ProcessId p = 1; p <= art.n; ++p)
      for (int r = 1; r <= out.rounds_completed(p); ++r)
        if (out.view(p, r) && out.published_at[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(r - 1)] <= last_crash)
          in_progress = std::max(in_progress, r);
    rep.suffix_start = in_progress + 1;
  }

  try {
    rep.strongly_correct = strongly_correct_window(suffix(trace, rep.suffix_start), params);
    rep.sufficient = true;
  } catch (const InsufficientData& e) {
    rep.note = e.what();
  }
  rep.sets_equal = rep.sufficient && rep.strongly_correct == rep.live;

  for (ProcessId i : rep.live.members()) {
    ProcSet part = trace.length() > 0 ? participation_set(trace, i) : ProcSet{};
    if (part != rep.stepped) rep.participation_mismatches.emplace_back(i, part);
  }
  return rep;
}

inline Theorem1Report check_theorem1(const AsToIisArtifacts& art, WindowParams params) {
  return check_theorem1(art, collect_views(art.n, art.status), params);
}

}  // namespace iisim
