#include <gtest/gtest.h>

#include "iisim/as_to_iis.hpp"

using namespace iisim;

namespace {

// Builds one simulator register whose logs hold the given entries.
struct BoardBuilder {
  int n;
  std::vector<std::shared_ptr<SimulatorStore>> stores;
  MemoryImage<SimRegister> image;

  explicit BoardBuilder(int n_) : n(n_), image(static_cast<std::size_t>(n_)) {
    for (int k = 0; k < n; ++k) {
      stores.push_back(std::make_shared<SimulatorStore>());
      stores.back()->logs.resize(static_cast<std::size_t>(n));
    }
  }
  BoardBuilder& log(ProcessId owner, ProcessId p, StatusEntry e, std::optional<View> view = std::nullopt) {
    stores[static_cast<std::size_t>(owner - 1)]->logs[static_cast<std::size_t>(p - 1)].push_back({e, view});
    return publish(owner, 1);
  }
  BoardBuilder& publish(ProcessId owner, std::uint64_t counter) {
    auto& cell = image[static_cast<std::size_t>(owner - 1)];
    SimRegister r;
    r.counter = cell ? std::max(cell->counter, counter) : counter;
    const auto& st = stores[static_cast<std::size_t>(owner - 1)];
    for (const auto& l : st->logs) r.log_lengths.push_back(static_cast<std::uint32_t>(l.size()));
    r.rap_length = static_cast<std::uint32_t>(st->rap_writes);
    r.store = st;
    cell = r;
    return *this;
  }
  BoardKnowledge knowledge() const {
    BoardKnowledge k(n);
    k.ingest(image);
    return k;
  }
};

StatusEntry run_at(int r, int l) { return {Disposition::run, {r, l}}; }
StatusEntry blocked_at(int r, int l) { return {Disposition::blocked, {r, l}}; }

std::vector<StatusEntry> entries_for(const AsToIisArtifacts& art, ProcessId p) {
  std::vector<StatusEntry> out;
  for (const auto& s : art.status)
    if (s.process == p) out.push_back(s.entry);
  return out;
}

// Straight-line expectation for a solo simulator of process 1: levels n..1 of
// each round, completing every round alone.
std::vector<StatusEntry> solo_expectation(int n, int rounds) {
  std::vector<StatusEntry> out;
  for (int r = 1; r <= rounds; ++r)
    for (int l = n; l >= 1; --l) out.push_back(run_at(r, l));
  return out;
}

}  // namespace

TEST(IsBlocked, NoBlockedEntries) {
  BoardBuilder b(3);
  b.log(1, 2, run_at(1, 3)).log(2, 2, run_at(1, 2));
  EXPECT_FALSE(b.knowledge().blocked(2));
}

TEST(IsBlocked, MixedFrontierEntries) {
  BoardBuilder b(3);
  b.log(1, 2, blocked_at(1, 2)).log(2, 2, run_at(1, 2));
  EXPECT_FALSE(b.knowledge().blocked(2));
}

TEST(IsBlocked, AllFrontierEntriesBlocked) {
  BoardBuilder b(3);
  b.log(3, 2, run_at(1, 3)).log(1, 2, blocked_at(1, 2)).log(2, 2, blocked_at(1, 2));
  EXPECT_TRUE(b.knowledge().blocked(2));
}

TEST(IsBlocked, OlderTailsDoNotCount) {
  BoardBuilder b(3);
  b.log(1, 2, blocked_at(1, 3)).log(2, 2, run_at(1, 2));
  EXPECT_FALSE(b.knowledge().blocked(2));
}

TEST(BoardKnowledge, FrontierReachedAndViews) {
  BoardBuilder b(2);
  b.log(1, 1, run_at(1, 2)).log(1, 1, run_at(1, 1)).log(2, 2, run_at(1, 2));
  b.log(2, 1, run_at(2, 2), ProcSet::of({1}));
  auto k = b.knowledge();
  EXPECT_EQ(k.frontier(1), (RoundLevel{2, 2}));
  EXPECT_EQ(k.reached({1, 2}), ProcSet::all(2));
  EXPECT_EQ(k.reached({1, 1}), ProcSet::of({1}));
  EXPECT_EQ(k.view(1, 1), ProcSet::of({1}));
  EXPECT_FALSE(k.view(2, 1));
  EXPECT_TRUE(k.participates(2));
}

TEST(FreezeScan, NoViewsNoFreeze) {
  BoardBuilder b(2);
  b.log(1, 1, run_at(1, 2));
  EXPECT_FALSE(b.knowledge().latest_acknowledged_round(1, 0));
}

TEST(FreezeScan, SoloViewIsSelfAcknowledged) {
  BoardBuilder b(2);
  b.log(1, 1, run_at(2, 2), ProcSet::of({1}));
  EXPECT_EQ(b.knowledge().latest_acknowledged_round(1, 0), 1);
  EXPECT_FALSE(b.knowledge().latest_acknowledged_round(1, 1));
}

TEST(FreezeScan, RequiresEveryViewMemberAware) {
  BoardBuilder b(2);
  // V_21 = {1,2} but 1 never saw 2 (V_11 = {1}).
  b.log(1, 1, run_at(2, 2), ProcSet::of({1}));
  b.log(2, 2, run_at(2, 2), ProcSet::of({1, 2}));
  auto k = b.knowledge();
  EXPECT_FALSE(k.latest_acknowledged_round(2, 0));
  // Round 2: 1 sees 2.
  b.log(1, 1, run_at(3, 2), ProcSet::of({1, 2}));
  EXPECT_EQ(b.knowledge().latest_acknowledged_round(2, 0), 1);
}

TEST(SelectCandidate, PrefersHigherLevel) {
  BoardBuilder b(3);
  b.log(1, 1, run_at(2, 3)).log(1, 2, run_at(2, 2)).log(1, 3, run_at(2, 1));
  b.publish(2, 1).publish(3, 1);
  auto k = b.knowledge();
  EXPECT_EQ(select_candidate(k, {0, 0, 0}, {}), 1);
  EXPECT_EQ(select_candidate(k, {1, 0, 0}, {}), 2);  // 1 frozen
  EXPECT_EQ(select_candidate(k, {0, 0, 0}, ProcSet::of({1})), 2);
}

TEST(SelectCandidate, TieBreakRotatesWithRound) {
  BoardBuilder b(3);
  b.log(1, 1, run_at(2, 2)).log(1, 2, run_at(2, 2));
  b.publish(2, 1);
  // (1+2) mod 3 = 0 < (2+2) mod 3 = 1
  EXPECT_EQ(select_candidate(b.knowledge(), {0, 0, 0}, {}), 1);
}

TEST(SelectCandidate, SkipsBlockedAndNonParticipants) {
  BoardBuilder b(3);
  b.log(1, 1, run_at(1, 3)).log(1, 1, blocked_at(1, 3));
  b.log(2, 2, run_at(1, 2));
  EXPECT_EQ(select_candidate(b.knowledge(), {0, 0, 0}, {}), 2);
}

TEST(ExtractIISTrace, PrefixUnionViews) {
  SimOutput out;
  out.n = 3;
  out.views = {{ProcSet::of({1})}, {ProcSet::of({1, 2})}, {}};
  auto t = extract_iis_trace(out, 1);
  ASSERT_EQ(t.length(), 1);
  EXPECT_EQ(t.round(1).blocks, (std::vector<ProcSet>{ProcSet::of({1}), ProcSet::of({2})}));
}

TEST(ExtractIISTrace, AllViewsEqual) {
  SimOutput out;
  out.n = 3;
  out.views = {{ProcSet::all(3)}, {ProcSet::all(3)}, {ProcSet::all(3)}};
  EXPECT_EQ(extract_iis_trace(out, 1).round(1).blocks, std::vector<ProcSet>{ProcSet::all(3)});
}

TEST(ExtractIISTrace, SharedViewIsOneBlock) {
  SimOutput out;
  out.n = 2;
  out.views = {{ProcSet::all(2)}, {ProcSet::all(2)}};
  EXPECT_EQ(extract_iis_trace(out, 1).round(1).blocks, std::vector<ProcSet>{ProcSet::all(2)});
}

TEST(ExtractIISTrace, RejectsAxiomViolations) {
  SimOutput out;
  out.n = 2;
  out.views = {{ProcSet::all(2)}, {ProcSet::of({2})}};
  EXPECT_NO_THROW(extract_iis_trace(out, 1));
  out.views = {{ProcSet::of({1, 2})}, {ProcSet::of({1})}};
  EXPECT_THROW(extract_iis_trace(out, 1), SimulationFault);
}

TEST(Simulator, SoloFirstDecisionDescends) {
  auto art = run_as_to_iis(3, Schedule::script(3, std::vector<ProcessId>(40, 1)), 40);
  auto e = entries_for(art, 1);
  ASSERT_GE(e.size(), 2u);
  EXPECT_EQ(e[0], run_at(1, 3));
  EXPECT_EQ(e[1], run_at(1, 2));
  for (ProcessId p = 2; p <= 3; ++p) EXPECT_TRUE(entries_for(art, p).empty());
}

TEST(Simulator, SoloRunFollowsStraightLineLevels) {
  const int n = 3;
  auto art = run_as_to_iis(n, Schedule::seeded(n, 0, {{2, 0}, {3, 0}}), 3000);
  auto e = entries_for(art, 1);
  auto expect = solo_expectation(n, 200);
  ASSERT_GT(e.size(), 3u * n);
  for (std::size_t k = 0; k < e.size(); ++k) EXPECT_EQ(e[k], expect[k]) << k;
  auto out = collect_views(n, art.status);
  for (int r = 1; r <= out.rounds_completed(1); ++r) EXPECT_EQ(out.view(1, r), ProcSet::of({1}));
}

TEST(Simulator, SingleProcessSystem) {
  auto art = run_as_to_iis(1, Schedule::seeded(1, 0), 500);
  auto out = collect_views(1, art.status);
  EXPECT_GT(out.rounds_completed(1), 5);
  for (int r = 1; r <= out.rounds_completed(1); ++r) EXPECT_EQ(out.view(1, r), ProcSet::of({1}));
}

TEST(Simulator, BoundedPrefixesOfTwoSimulatorsAreSafe) {
  // Every interleaving of the first 10 activations, completed round-robin.
  const int depth = 10;
  for (std::uint32_t bits = 0; bits < (1u << depth); ++bits) {
    std::vector<ProcessId> steps;
    for (int k = 0; k < depth; ++k) steps.push_back(((bits >> k) & 1u) ? 2 : 1);
    for (int k = 0; k < 400; ++k) steps.push_back(1 + k % 2);
    auto art = run_as_to_iis(2, Schedule::script(2, steps), steps.size());
    auto rep = check_alg1_safety(2, art.status);
    ASSERT_TRUE(rep.ok()) << bits;
    auto out = collect_views(2, art.status);
    ASSERT_GE(out.rounds_completed(1), 1) << bits;
    ASSERT_GE(out.rounds_completed(2), 1) << bits;
  }
}

TEST(Simulator, FuzzedRunsAreSafe) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    auto art = run_as_to_iis(n, Schedule::seeded(n, seed, random_crashes(n, seed, 0.4, 2000)), 4000);
    auto rep = check_alg1_safety(n, art.status);
    EXPECT_TRUE(rep.ok()) << "seed " << seed;
    EXPECT_NO_THROW(extract_iis_trace(collect_views(n, art.status), 1000));
  }
}

TEST(Simulator, CrashedProcessStaysFrozen) {
  const int n = 3;
  auto rec = run(make_simulators(n), Schedule::seeded(n, 8, {{3, 600}}), 6000);
  const auto& k = rec.processes[0].knowledge();
  EXPECT_EQ(rec.processes[0].frozen_counter(3), k.counter(3));
  EXPECT_EQ(rec.processes[1].frozen_counter(3), rec.processes[1].knowledge().counter(3));
  // Process 3 stops completing rounds while 1 and 2 keep going.
  EXPECT_LT(k.last_completed(3) + 20, k.last_completed(1));
}

TEST(Simulator, BlockedProcessIsLaterResolved) {
  // Find runs with bottom outcomes; every live process that was blocked moves on.
  int blocked_runs = 0;
  for (std::uint64_t seed = 0; seed < 60 && blocked_runs < 3; ++seed) {
    auto art = run_as_to_iis(3, Schedule::seeded(3, seed), 8000);
    bool any = false;
    for (const auto& s : art.status) {
      if (s.entry.disposition != Disposition::blocked) continue;
      any = true;
      bool moved = false;
      for (const auto& t : art.status)
        if (t.process == s.process && t.entry.disposition == Disposition::run &&
            progress_order(s.entry.at, t.entry.at) < 0)
          moved = true;
      EXPECT_TRUE(moved) << "seed " << seed;
    }
    if (any) ++blocked_runs;
  }
  EXPECT_GT(blocked_runs, 0);
}

TEST(Theorem1, FuzzedWindowsMatchLiveSets) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto art = run_as_to_iis(3, Schedule::seeded(3, seed, random_crashes(3, seed, 0.3, 5000)), 10000);
    auto rep = check_theorem1(art, WindowParams::defaults(3));
    EXPECT_TRUE(rep.ok()) << "seed " << seed << ": " << rep.strongly_correct.str() << " vs " << rep.live.str() << " "
                          << rep.note;
  }
}

TEST(Theorem1, ReportsInsufficientData) {
  auto art = run_as_to_iis(3, Schedule::seeded(3, 1), 200);
  auto rep = check_theorem1(art, WindowParams::defaults(3));
  EXPECT_FALSE(rep.sufficient);
  EXPECT_FALSE(rep.ok());
}
