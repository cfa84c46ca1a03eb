// Copyright 2026 The Reachfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reachfuzz/cfg_index.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <atomic>
#include <set>
#include <thread>

#include "reachfuzz/error.h"
#include "support/test_support.h"

namespace reachfuzz {
namespace {

using ::reachfuzz::testing::BruteForceReach;
using ::reachfuzz::testing::BuildProgramFromFile;
using ::reachfuzz::testing::BuiltProgram;
using ::reachfuzz::testing::DumpBuilder;
using ::reachfuzz::testing::InstrumentSources;
using ::reachfuzz::testing::RandomCoverageFor;
using ::reachfuzz::testing::RandomProgramSources;
using ::reachfuzz::testing::TestDataPath;

ReachabilityResult Sorted(ReachabilityResult r) {
  std::sort(r.begin(), r.end());
  return r;
}

class WorkedExampleReachTest : public ::testing::Test {
 protected:
  std::vector<uint32_t> Indices(const std::string &labels) const {
    std::vector<uint32_t> out;
    for (char c : labels) out.push_back(static_cast<uint32_t>(built_.Index("main", {c})));
    return out;
  }
  std::vector<uint8_t> Global(const std::string &labels) const {
    std::vector<uint8_t> global(index_.map_size(), 0);
    for (uint32_t i : Indices(labels)) global[i] = 1;
    return global;
  }
  ReachEntry Entry(char label, uint32_t depth) const {
    return {{built_.Uid("main", {label}), false}, depth};
  }

  BuiltProgram built_ = BuildProgramFromFile(TestDataPath("worked_example.mir"));
  CfgIndex index_{built_.dump};
};

TEST_F(WorkedExampleReachTest, ElseBranchInputReachesTheInnerSwitch) {
  ReachabilityResult result = index_.CalcReachableBlocks(Indices("AFP"), Global("ABCDEFP"));
  ReachabilityResult expected = {Entry('G', 1), Entry('H', 2), Entry('J', 2),
                                 Entry('K', 2), Entry('L', 2), Entry('N', 2)};
  EXPECT_EQ(result, expected);
}

TEST_F(WorkedExampleReachTest, FirstArmInputReachesNothing) {
  EXPECT_TRUE(index_.CalcReachableBlocks(Indices("ABP"), Global("ABCDEFP")).empty());
}

TEST_F(WorkedExampleReachTest, FreshCampaignSeesEveryArm) {
  ReachabilityResult result = index_.CalcReachableBlocks(Indices("ABP"), Global("ABP"));
  ReachabilityResult expected = {Entry('C', 1), Entry('D', 1), Entry('E', 1), Entry('F', 1),
                                 Entry('G', 2), Entry('H', 3), Entry('J', 3), Entry('K', 3),
                                 Entry('L', 3), Entry('N', 3)};
  EXPECT_EQ(Sorted(result), Sorted(expected));
}

TEST_F(WorkedExampleReachTest, EntryCacheListsTheFiveArms) {
  const ReachSet &next = index_.InstrumentedSuccessors(built_.Uid("main", "A"));
  std::vector<uint64_t> arms;
  for (char c : std::string("BCDEF")) arms.push_back(built_.Uid("main", {c}));
  EXPECT_EQ(next.blocks, arms);
  EXPECT_TRUE(next.indirect_sites.empty());
  // F reaches G and P through the uninstrumented I.
  EXPECT_EQ(index_.InstrumentedSuccessors(built_.Uid("main", "F")).blocks,
            (std::vector<uint64_t>{built_.Uid("main", "G"), built_.Uid("main", "P")}));
  EXPECT_TRUE(index_.InstrumentedSuccessors(built_.Uid("main", "P")).blocks.empty());
  EXPECT_EQ(index_.FunctionEntryReachable("main").blocks,
            std::vector<uint64_t>{built_.Uid("main", "A")});
}

TEST_F(WorkedExampleReachTest, FullyCoveredProgramReachesNothing) {
  std::vector<uint8_t> all(index_.map_size(), 1);
  for (const std::string &input : {"ABP", "ACP", "AFP", "AFGHP", "AFGL"}) {
    EXPECT_TRUE(index_.CalcReachableBlocks(Indices(input), all).empty()) << input;
  }
}

TEST_F(WorkedExampleReachTest, UnknownCoverageIndexIsAnInconsistentBuild) {
  std::vector<uint32_t> bogus = {static_cast<uint32_t>(index_.map_size())};
  EXPECT_THROW(index_.CalcReachableBlocks(bogus, Global("A")), InconsistentBuildError);
}

TEST(CfgIndexTest, SingleBlockFunctionHasNoSuccessors) {
  DumpBuilder b;
  uint64_t only = b.AddBlock("f", true);
  CfgIndex index(b.Build());
  EXPECT_TRUE(index.InstrumentedSuccessors(only).blocks.empty());
  EXPECT_TRUE(index.InstrumentedSuccessors(only).indirect_sites.empty());
}

TEST(CfgIndexTest, CachesLookThroughUninstrumentedCallees) {
  // f: f0 (calls g) -> f1. g: g0 (uninstrumented) -> g1 -> g2.
  DumpBuilder b;
  uint64_t f0 = b.AddBlock("f", true, {"g", "external"});
  uint64_t f1 = b.AddBlock("f", true);
  b.AddEdge(f0, f1);
  uint64_t g0 = b.AddBlock("g", false, {}, 1);
  uint64_t g1 = b.AddBlock("g", true);
  uint64_t g2 = b.AddBlock("g", false);
  b.AddEdge(g0, g1);
  b.AddEdge(g1, g2);
  CfgIndex index(b.Build());
  EXPECT_EQ(index.InstrumentedSuccessors(f0).blocks, (std::vector<uint64_t>{f1, g1}));
  EXPECT_EQ(index.InstrumentedSuccessors(f0).indirect_sites, std::vector<uint64_t>{g0});
  EXPECT_EQ(index.FunctionEntryReachable("g").blocks, std::vector<uint64_t>{g1});
  EXPECT_EQ(index.unresolved_calls(), std::vector<std::string>{"external"});

  std::vector<uint8_t> global(index.map_size(), 0);
  global[b.Index(f0)] = 1;
  std::vector<uint32_t> input = {b.Index(f0)};
  EXPECT_EQ(Sorted(index.CalcReachableBlocks(input, global)),
            Sorted({{{f1, false}, 1}, {{g1, false}, 1}, {{g0, true}, 1}}));
}

TEST(CfgIndexTest, RecursionTerminates) {
  DumpBuilder b;
  uint64_t f0 = b.AddBlock("f", false, {"f", "g"});
  uint64_t f1 = b.AddBlock("f", true);
  b.AddEdge(f0, f1);
  uint64_t g0 = b.AddBlock("g", false, {"f"});
  CfgIndex index(b.Build());
  EXPECT_EQ(index.FunctionEntryReachable("f").blocks, std::vector<uint64_t>{f1});
  EXPECT_EQ(index.FunctionEntryReachable("g").blocks, std::vector<uint64_t>{f1});
  (void)g0;
}

TEST(CfgIndexTest, DanglingSuccessorIsRejected) {
  DumpBuilder b;
  uint64_t a = b.AddBlock("f", true);
  CfgDump dump = b.Build();
  dump.functions["f"][0].blocks[0].successor_uids.push_back(a + 5);
  EXPECT_THROW(CfgIndex{dump}, ValidationError);
}

// Two definitions of helper: the index assumes the first until coverage
// proves the second is linked in.
TEST(CfgIndexTest, CoverageOfAnotherDefinitionPromotesIt) {
  CfgDump dump = InstrumentSources({
      "fn main() { a: call helper() br x b c b: return 1 c: return 2 }",
      "fn helper() { a: br x b c b: return 1 c: return 0 }",
      "fn helper() { a: br x b c b: goto d c: return 0 d: return 3 }",
  });
  CfgIndex index(dump);
  const auto &defs = dump.functions.at("helper");
  auto uid = [&](size_t def, size_t block) { return defs[def].blocks[block].uid; };
  auto idx = [&](size_t def, size_t block) {
    return static_cast<uint32_t>(*defs[def].blocks[block].coverage_map_index);
  };
  uint64_t main_a = dump.functions.at("main")[0].blocks[0].uid;
  std::vector<uint32_t> main_covered = {
      static_cast<uint32_t>(*dump.functions.at("main")[0].blocks[0].coverage_map_index)};
  std::vector<uint8_t> global(index.map_size(), 0);
  global[main_covered[0]] = 1;

  EXPECT_EQ(index.ActiveDefinition("helper"), 0u);
  EXPECT_TRUE(std::count(index.InstrumentedSuccessors(main_a).blocks.begin(),
                         index.InstrumentedSuccessors(main_a).blocks.end(), uid(0, 0)));
  ReachabilityResult before = Sorted(index.CalcReachableBlocks(main_covered, global));
  EXPECT_EQ(before, BruteForceReach(dump, main_covered, global));

  std::vector<uint32_t> consistent = {idx(0, 0), idx(0, 1)};
  EXPECT_FALSE(index.ResolveDefinition("helper", consistent));
  EXPECT_TRUE(index.ObserveCoverage(consistent).empty());

  std::vector<uint32_t> observed = {main_covered[0], idx(1, 0)};
  EXPECT_EQ(index.ObserveCoverage(observed), std::vector<std::string>{"helper"});
  EXPECT_EQ(index.ActiveDefinition("helper"), 1u);
  EXPECT_EQ(index.FunctionEntryReachable("helper").blocks, std::vector<uint64_t>{uid(1, 0)});
  ReachabilityResult after = Sorted(index.CalcReachableBlocks(main_covered, global));
  EXPECT_NE(after, before);
  EXPECT_EQ(after, BruteForceReach(dump, main_covered, global, {{"helper", 1}}));
}

TEST(CfgIndexTest, MatchesBruteForceOnRandomPrograms) {
  std::mt19937_64 rng(17);
  int compared = 0;
  for (int round = 0; round < 300; ++round) {
    CfgDump dump = InstrumentSources(RandomProgramSources(rng));
    CfgIndex index(dump);
    for (int q = 0; q < 5; ++q) {
      auto coverage = RandomCoverageFor(dump, rng);
      if (coverage.per_input.empty()) continue;
      ReachabilityResult got = index.CalcReachableBlocks(coverage.per_input, coverage.global);
      ReachabilityResult sorted = Sorted(got);
      ASSERT_EQ(sorted, BruteForceReach(dump, coverage.per_input, coverage.global));
      // Deduplicated by key, no depth 0, nothing covered.
      std::set<ReachKey> keys;
      for (const ReachEntry &e : got) {
        EXPECT_TRUE(keys.insert(e.key).second);
        EXPECT_GE(e.depth, 1u);
        if (!e.key.indirect) EXPECT_FALSE(coverage.global[index.IndexOfUid(e.key.uid)]);
      }
      ++compared;
    }
  }
  EXPECT_GE(compared, 200);
}

TEST(CfgIndexTest, MoreGlobalCoverageNeverAddsEntries) {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 200; ++round) {
    CfgDump dump = InstrumentSources(RandomProgramSources(rng));
    CfgIndex index(dump);
    auto coverage = RandomCoverageFor(dump, rng);
    if (coverage.per_input.empty()) continue;
    ReachabilityResult small = index.CalcReachableBlocks(coverage.per_input, coverage.global);
    std::vector<uint8_t> bigger = coverage.global;
    for (auto &flag : bigger) flag = flag || (rng() % 3 == 0);
    ReachabilityResult large = index.CalcReachableBlocks(coverage.per_input, bigger);
    std::set<ReachKey> small_keys;
    for (const ReachEntry &e : small) small_keys.insert(e.key);
    for (const ReachEntry &e : large) EXPECT_TRUE(small_keys.count(e.key));
  }
}

// Depth-1 entries are exactly the uncovered instrumented blocks one
// instrumented step away, read straight off the block graph.
TEST(CfgIndexTest, DepthOneEntriesAreDirectUncoveredNeighbours) {
  std::mt19937_64 rng(29);
  for (int round = 0; round < 200; ++round) {
    DumpBuilder b;
    int n = 2 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) b.AddBlock("f", true);
    std::vector<std::set<uint64_t>> succ(n);
    for (int i = 0; i < n; ++i) {
      int degree = static_cast<int>(rng() % 4);
      for (int e = 0; e < degree; ++e) {
        uint64_t t = rng() % n;
        if (succ[i].insert(t).second) b.AddEdge(i, t);
      }
    }
    CfgDump dump = b.Build();
    CfgIndex index(dump);
    auto coverage = RandomCoverageFor(dump, rng);
    std::set<uint64_t> expected;
    for (uint32_t src : coverage.per_input) {
      for (uint64_t t : succ[src]) {
        if (!coverage.global[t]) expected.insert(t);
      }
    }
    std::set<uint64_t> got;
    for (const ReachEntry &e : index.CalcReachableBlocks(coverage.per_input, coverage.global)) {
      if (e.depth == 1) got.insert(e.key.uid);
    }
    EXPECT_EQ(got, expected);
  }
}

TEST(CfgIndexTest, ParallelQueriesAgree) {
  std::mt19937_64 rng(31);
  CfgDump dump = InstrumentSources(RandomProgramSources(rng));
  CfgIndex index(dump);
  auto coverage = RandomCoverageFor(dump, rng);
  ReachabilityResult expected = index.CalcReachableBlocks(coverage.per_input, coverage.global);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        if (index.CalcReachableBlocks(coverage.per_input, coverage.global) != expected) {
          ++mismatches;
        }
      }
    });
  }
  for (auto &thread : threads) thread.join();
  EXPECT_EQ(mismatches.load(), 0);
}

}  // namespace
}  // namespace reachfuzz
