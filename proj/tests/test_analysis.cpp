#include <gtest/gtest.h>

#include "iisim/analysis.hpp"
#include "iisim/schedule.hpp"

using namespace iisim;

namespace {

OrderedPartition part(std::initializer_list<std::initializer_list<ProcessId>> blocks) {
  OrderedPartition p;
  for (auto b : blocks) p.blocks.push_back(ProcSet::of(b));
  return p;
}

IISTrace periodic(int n, std::vector<OrderedPartition> period, int rounds) {
  return IISSchedule{n, std::move(period), true}.expand(rounds);
}

IISTrace cyclic(int rounds) { return periodic(3, {part({{1}, {2, 3}}), part({{3}, {1, 2}})}, rounds); }

}  // namespace

TEST(AwareOf, SelfIsAlwaysAware) {
  auto t = cyclic(10);
  EXPECT_TRUE(aware_of(t, 2, 2, 4));
}

TEST(AwareOf, UnseenProcessIsUnknownToOthers) {
  auto t = periodic(3, {part({{1, 2}, {3}})}, 20);
  for (int r = 1; r <= 20; ++r) {
    EXPECT_FALSE(aware_of(t, 1, 3, r));
    EXPECT_FALSE(aware_of(t, 2, 3, r));
    EXPECT_TRUE(aware_of(t, 3, 1, r));
  }
}

TEST(AwareOf, CyclicRunReachesEveryRoundOfTwoWithinTwoRounds) {
  auto t = cyclic(40);
  for (int r = 1; r < 40; ++r) EXPECT_TRUE(reaching(union_graph(t, r, r + 1), 2).contains(1)) << r;
}

TEST(StronglyCorrect, OneBlockEveryRoundGivesEveryone) {
  auto t = periodic(4, {part({{1, 2, 3, 4}})}, 50);
  EXPECT_EQ(strongly_correct_window(t, WindowParams::defaults(4)), ProcSet::all(4));
}

TEST(StronglyCorrect, UnseenObserverIsExcluded) {
  auto t = periodic(3, {part({{1, 2}, {3}}), part({{2}, {1}, {3}})}, 50);
  EXPECT_EQ(strongly_correct_window(t, WindowParams::defaults(3)), ProcSet::of({1, 2}));
}

TEST(StronglyCorrect, CyclicRunGivesAllThree) {
  EXPECT_EQ(strongly_correct_window(cyclic(60), WindowParams::defaults(3)), ProcSet::all(3));
}

TEST(StronglyCorrect, ShortTraceIsInsufficient) {
  EXPECT_THROW(strongly_correct_window(cyclic(5), WindowParams::defaults(3)), InsufficientData);
  EXPECT_THROW(strongly_correct_window(cyclic(50), {0, 0}), InvalidInput);
}

TEST(StronglyCorrect, DepartedProcessIsExcluded) {
  IISTrace t;
  t.n = 3;
  for (int r = 1; r <= 40; ++r) t.rounds.push_back(r <= 10 ? part({{1, 2, 3}}) : part({{1, 2}}));
  EXPECT_EQ(strongly_correct_window(t, WindowParams::defaults(3)), ProcSet::of({1, 2}));
}

TEST(StronglyCorrect, GrowsWithWindowWidth) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 4);
    auto t = random_iis_trace(n, 120, seed);
    ProcSet prev;
    for (int w = 1; w <= 4 * n; ++w) {
      ProcSet cur = strongly_correct_window(t, {2 * n, w});
      EXPECT_TRUE(prev.subset_of(cur)) << "seed " << seed << " width " << w;
      prev = cur;
    }
  }
}

TEST(StronglyCorrect, ContainedInFinalParticipants) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 4);
    auto t = random_iis_trace(n, 120, seed);
    EXPECT_TRUE(strongly_correct_window(t, WindowParams::defaults(n)).subset_of(t.participants(t.length())));
  }
}

TEST(StrongComponents, SinkOfCycleWithTail) {
  // 1 -> 2 -> 3 -> 2 : sink is {2,3}
  Adjacency g{ProcSet::of({1, 2}), ProcSet::of({2, 3}), ProcSet::of({2, 3})};
  EXPECT_EQ(sink_component(g, ProcSet::all(3)), ProcSet::of({2, 3}));
  // two sinks
  Adjacency h{ProcSet::of({1}), ProcSet::of({2})};
  EXPECT_TRUE(sink_component(h, ProcSet::all(2)).empty());
}

TEST(Axioms, ValidPair) { EXPECT_TRUE(check_is_axioms({ProcSet::of({1}), ProcSet::of({1, 2})}).ok()); }

TEST(Axioms, ImmediacyViolationReportsPair) {
  auto rep = check_is_axioms({ProcSet::of({1, 2}), ProcSet::of({1})});
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(rep.has(Axiom::immediacy, 1, 2));
}

TEST(Axioms, IncomparableViewsViolateContainment) {
  auto rep = check_is_axioms({ProcSet::of({1, 3}), ProcSet::of({1, 2}), ProcSet{}});
  EXPECT_TRUE(rep.has(Axiom::containment, 1, 2));
}

TEST(Axioms, MissingSelfIsReported) {
  auto rep = check_is_axioms({ProcSet::of({2}), ProcSet::of({2})});
  EXPECT_TRUE(rep.has(Axiom::self_inclusion, 1, 1));
}

TEST(Axioms, EveryValidTraceRoundPasses) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto t = random_iis_trace(5, 30, seed);
    for (int r = 1; r <= t.length(); ++r) EXPECT_TRUE(check_is_axioms(round_graph(t, r)).ok());
  }
}

TEST(Participation, SoloTrace) {
  auto t = periodic(3, {part({{2}})}, 10);
  EXPECT_EQ(participation_set(t, 2), ProcSet::of({2}));
}

TEST(Participation, LockStepIsEveryone) {
  auto t = periodic(3, {part({{1, 2, 3}})}, 10);
  EXPECT_EQ(participation_set(t, 1), ProcSet::all(3));
}

TEST(Participation, NeverSeenProcessIsExcluded) {
  auto t = periodic(3, {part({{1, 2}, {3}})}, 10);
  EXPECT_EQ(participation_set(t, 1), ProcSet::of({1, 2}));
  EXPECT_EQ(participation_set(t, 3), ProcSet::all(3));
}

TEST(Crosscheck, LockStepAndSolo) {
  auto all = proposition1_crosscheck(periodic(3, {part({{1, 2, 3}})}, 30), WindowParams::defaults(3));
  EXPECT_TRUE(all.agree);
  EXPECT_EQ(all.proposition_form, ProcSet::all(3));
  auto solo = proposition1_crosscheck(periodic(3, {part({{3}})}, 30), WindowParams::defaults(3));
  EXPECT_TRUE(solo.agree);
  EXPECT_EQ(solo.sink_form, ProcSet::of({3}));
}

TEST(Crosscheck, FuzzedTracesAgree) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 1 + static_cast<int>(seed % 5);
    auto cc = proposition1_crosscheck(random_iis_trace(n, 150, seed), WindowParams::defaults(n));
    EXPECT_TRUE(cc.agree) << "seed " << seed;
  }
}
