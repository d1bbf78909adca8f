#include <gtest/gtest.h>

#include "iisim/kernel.hpp"
#include "iisim/schedule.hpp"

using namespace iisim;

TEST(SharedMemory, WriteThenSnapshot) {
  SharedMemory<int> m(3);
  EXPECT_TRUE(m.write(1, 7));
  auto s = m.snapshot(2);
  ASSERT_TRUE(s);
  EXPECT_EQ((*s)[0], 7);
  EXPECT_FALSE((*s)[1]);
}

TEST(SharedMemory, LatestWriteVisible) {
  SharedMemory<int> m(2);
  m.write(1, 1);
  m.write(1, 2);
  EXPECT_EQ((*m.snapshot(1))[0], 2);
}

TEST(SharedMemory, CrashedWriterIsRejected) {
  SharedMemory<int> m(2);
  m.crash(1);
  EXPECT_FALSE(m.write(1, 3));
  EXPECT_FALSE(m.snapshot(1));
  EXPECT_FALSE((*m.snapshot(2))[0]);
}

TEST(SharedMemory, FreshMemoryIsAllBottom) {
  SharedMemory<int> m(4);
  for (const auto& c : *m.snapshot(3)) EXPECT_FALSE(c);
}

TEST(SharedMemory, BothWritersVisible) {
  SharedMemory<int> m(2);
  m.write(1, 1);
  m.write(2, 2);
  auto s = *m.snapshot(1);
  EXPECT_EQ(s[0], 1);
  EXPECT_EQ(s[1], 2);
}

TEST(Run, EmptyScheduleGivesEmptyTrace) {
  auto rec = run(std::vector<AlternatingProcess>(2), Schedule::script(2, {}), 100);
  EXPECT_TRUE(rec.as_trace.events.empty());
  EXPECT_EQ(rec.halted, HaltReason::script_exhausted);
}

TEST(Run, SoloProcessAlternates) {
  const std::size_t k = 9;
  auto rec = run(std::vector<AlternatingProcess>(1), Schedule::seeded(1, 0), k);
  ASSERT_EQ(rec.as_trace.events.size(), k);
  for (std::size_t e = 0; e < k; ++e) EXPECT_EQ(rec.as_trace.events[e].is_update(), e % 2 == 0);
  EXPECT_FALSE(find_replay_violation(rec.as_trace));
}

TEST(Run, SameSeedSameTrace) {
  auto a = run(std::vector<AlternatingProcess>(4), Schedule::seeded(4, 99, {{3, 40}}), 500);
  auto b = run(std::vector<AlternatingProcess>(4), Schedule::seeded(4, 99, {{3, 40}}), 500);
  EXPECT_EQ(a.as_trace, b.as_trace);
  auto c = run(std::vector<AlternatingProcess>(4), Schedule::seeded(4, 100, {{3, 40}}), 500);
  EXPECT_NE(a.as_trace, c.as_trace);
}

TEST(Run, SnapshotsAreMonotoneAndReplayValid) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto rec = run(std::vector<AlternatingProcess>(3), Schedule::seeded(3, seed, random_crashes(3, seed, 0.5, 300)),
                   600);
    EXPECT_FALSE(find_replay_violation(rec.as_trace));
    // Cells only grow: a later snapshot never shows an older value.
    std::vector<std::int64_t> high(3, -1);
    for (const auto& ev : rec.as_trace.events) {
      if (ev.is_update()) continue;
      const auto& cells = std::get<SnapshotResult<std::int64_t>>(ev.op).cells;
      for (std::size_t j = 0; j < 3; ++j) {
        std::int64_t v = cells[j] ? *cells[j] : -1;
        EXPECT_GE(v, high[j]);
        high[j] = v;
      }
    }
  }
}

TEST(Run, CrashedProcessTakesNoFurtherSteps) {
  auto rec = run(std::vector<AlternatingProcess>(3), Schedule::seeded(3, 1, {{2, 20}}), 400);
  std::size_t count = 0;
  for (const auto& ev : rec.as_trace.events)
    if (ev.actor == 2) ++count;
  EXPECT_LE(count, 20u);
}

TEST(Run, ScriptedStepOfCrashedProcessIsANoOp) {
  auto rec = run(std::vector<AlternatingProcess>(2), Schedule::script(2, {1, 2, 2, 1}, {{2, 1}}), 10);
  EXPECT_EQ(rec.steps, 4u);
  EXPECT_EQ(rec.as_trace.events.size(), 2u);
}
