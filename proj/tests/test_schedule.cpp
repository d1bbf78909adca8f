#include <sstream>

#include <gtest/gtest.h>

#include "iisim/analysis.hpp"
#include "iisim/schedule.hpp"
#include "iisim/script.hpp"

using namespace iisim;

TEST(Schedule, ScriptReturnsEntriesInOrder) {
  Schedule s = Schedule::script(2, {1, 2, 2});
  EXPECT_EQ(s.next(0, ProcSet::all(2)), 1);
  EXPECT_EQ(s.next(1, ProcSet::all(2)), 2);
  EXPECT_EQ(s.next(2, ProcSet::all(2)), 2);
  EXPECT_EQ(s.next(3, ProcSet::all(2)), std::nullopt);
}

TEST(Schedule, ScriptRejectsUnknownProcess) { EXPECT_THROW(Schedule::script(2, {3}), InvalidInput); }

TEST(Schedule, SeededStreamIsDeterministic) {
  Schedule a = Schedule::seeded(4, 11), b = Schedule::seeded(4, 11);
  for (std::size_t k = 0; k < 1000; ++k) EXPECT_EQ(a.next(k, ProcSet::all(4)), b.next(k, ProcSet::all(4)));
}

TEST(Schedule, SeededStreamRespectsStarvationBound) {
  const int n = 5;
  Schedule s = Schedule::seeded(n, 3, {}, {0, 50});
  std::vector<std::size_t> last(n + 1, 0);
  for (std::size_t k = 0; k < 20000; ++k) {
    auto p = s.next(k, ProcSet::all(n));
    ASSERT_TRUE(p);
    EXPECT_LE(k - last[*p], static_cast<std::size_t>(4 * n) + static_cast<std::size_t>(n));
    last[*p] = k;
  }
}

TEST(Schedule, SeededStreamSkipsCrashedProcesses) {
  Schedule s = Schedule::seeded(3, 5, {{2, 10}});
  for (std::size_t k = 10; k < 500; ++k) EXPECT_NE(s.next(k, ProcSet::all(3)), 2);
}

TEST(RandomCrashes, AlwaysLeavesASurvivor) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto c = random_crashes(3, seed, 1.0, 100);
    EXPECT_LT(c.size(), 3u);
    for (const auto& [p, at] : c) EXPECT_LT(at, 100u);
  }
  EXPECT_TRUE(random_crashes(3, 1, 0.0, 100).empty());
}

TEST(RandomIISTrace, IsValidAndNested) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto t = random_iis_trace(1 + static_cast<int>(seed % 5), 80, seed);
    EXPECT_NO_THROW(validate_iis_trace(t));
    EXPECT_EQ(t.length(), 80);
    EXPECT_FALSE(t.participants(80).empty());
  }
}

TEST(IISSchedule, RepeatExpandsPeriodically) {
  IISSchedule s{3, {{{ProcSet::of({1}), ProcSet::of({2, 3})}}, {{ProcSet::of({3}), ProcSet::of({1, 2})}}}, true};
  auto t = s.expand(5);
  EXPECT_EQ(t.length(), 5);
  EXPECT_EQ(t.round(5), t.round(1));
  s.repeat = false;
  EXPECT_EQ(s.expand(5).length(), 2);
}

TEST(IISScript, ParsesBlocksCommentsAndRepeat) {
  std::istringstream in("# cycle\n1 | 2 3\n3 | 1 2   # second\n\nrepeat\n");
  auto s = parse_iis_script(in);
  EXPECT_EQ(s.n, 3);
  EXPECT_TRUE(s.repeat);
  ASSERT_EQ(s.rounds.size(), 2u);
  EXPECT_EQ(s.rounds[0].str(), OrderedPartition({{ProcSet::of({1}), ProcSet::of({2, 3})}}).str());
  EXPECT_EQ(s.rounds[1].blocks[1], ProcSet::of({1, 2}));
}

TEST(IISScript, ReportsLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_iis_script(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("1 2\n1 | x\n"), 2);
  EXPECT_EQ(line_of("1 2\n\n1 | | 2\n"), 3);
  EXPECT_EQ(line_of("1 2\n1 1\n"), 2);
  EXPECT_EQ(line_of("1\nrepeat\n1\n"), 3);
  EXPECT_EQ(line_of("repeat\n"), 1);
  EXPECT_GT(line_of("1\n1 2\n"), 0);  // participants grow
}

TEST(ASScript, ParsesStepsAndCrashes) {
  std::istringstream in("1\n2\ncrash 2\n1 # again\n");
  auto s = parse_as_script(in);
  EXPECT_EQ(s.n, 2);
  EXPECT_EQ(s.steps, (std::vector<ProcessId>{1, 2, 1}));
  EXPECT_EQ(s.crashes.at(2), 2u);
}

TEST(ASScript, ReportsLineNumbers) {
  std::istringstream in("1\n2\ncrash\n");
  try {
    parse_as_script(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  std::istringstream bad("1\n0\n");
  EXPECT_THROW(parse_as_script(bad), ParseError);
}
