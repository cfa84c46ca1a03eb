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

#include "reachfuzz/scheduler.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "reachfuzz/error.h"
#include "support/test_support.h"

namespace reachfuzz {
namespace {

using ::reachfuzz::testing::BruteForceReach;
using ::reachfuzz::testing::DumpBuilder;
using ::reachfuzz::testing::InstrumentSources;
using ::reachfuzz::testing::RandomProgramSources;
using ::reachfuzz::testing::RarityGraph;

// Feeds the corpus to the scheduler one entry at a time.
void Admit(Scheduler &scheduler, const Corpus &corpus) {
  Corpus grown;
  for (const CorpusEntry &entry : corpus) {
    grown.push_back(entry);
    scheduler.OnNewEntry(grown);
  }
}

TEST(SchedulerTest, VariantNames) {
  for (auto v : {SchedulerVariant::kDirectNeighbours, SchedulerVariant::kReachable,
                 SchedulerVariant::kReachableRarity, SchedulerVariant::kReachableRarityDepth,
                 SchedulerVariant::kRandom, SchedulerVariant::kPowerSchedule}) {
    EXPECT_EQ(ParseSchedulerVariant(SchedulerName(v)), v);
  }
  EXPECT_EQ(ParseSchedulerVariant("full"), SchedulerVariant::kReachableRarityDepth);
  EXPECT_EQ(ParseSchedulerVariant("bogus"), std::nullopt);
}

TEST(SchedulerTest, RarityExampleWeights) {
  RarityGraph g;
  ManualClock clock;
  ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarity, *g.index, clock);
  Admit(scheduler, g.corpus);
  scheduler.ComputeAllScores(g.corpus);
  EXPECT_EQ(g.index->UidOfIndex(g.b.Index(g.j)), g.j);
  EXPECT_EQ(scheduler.rarity().Count({{g.j, false}, 1}), 3u);
  EXPECT_EQ(scheduler.rarity().Count({{g.n, false}, 1}), 1u);
  const auto &scores = scheduler.state().scores;
  ASSERT_EQ(scores.size(), 4u);
  EXPECT_DOUBLE_EQ(scores[0], 1.0 / 3);
  EXPECT_DOUBLE_EQ(scores[1], 1.0 / 3);
  EXPECT_DOUBLE_EQ(scores[2], 1.0 / 3);
  EXPECT_DOUBLE_EQ(scores[3], 1.0);
}

TEST(SchedulerTest, RarityExampleSelectionFrequencies) {
  RarityGraph g;
  ManualClock clock;
  ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarity, *g.index, clock);
  Admit(scheduler, g.corpus);
  Rng rng(99);
  std::vector<int> hits(4, 0);
  constexpr int kDraws = 100'000;
  for (int i = 0; i < kDraws; ++i) ++hits[scheduler.SelectNext(g.corpus, rng)];
  const double expected[] = {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 2};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(hits[i] / static_cast<double>(kDraws), expected[i], 0.02 * expected[i]) << i;
  }
}

TEST(SchedulerTest, ScoreFormulas) {
  RarityTable rarity;
  ReachabilityResult g1 = {{{7, false}, 1}};
  rarity.Add(g1);
  EXPECT_DOUBLE_EQ(ComputeScore(rarity, g1, 2, SchedulerVariant::kReachableRarityDepth), 0.5);
  EXPECT_DOUBLE_EQ(ComputeScore(rarity, {}, 1, SchedulerVariant::kReachableRarityDepth), 0.0);

  ReachabilityResult mixed = {{{1, false}, 1}, {{2, false}, 2}, {{2, true}, 3}};
  rarity.Add(mixed);
  rarity.Add({{{2, false}, 2}});
  // freqs: (1,1):1 (2,2):2 (2i,3):1
  EXPECT_DOUBLE_EQ(ComputeScore(rarity, mixed, 4, SchedulerVariant::kReachableRarityDepth),
                   (1.0 + 1.0 / 4 + 1.0 / 3) / 4);
  EXPECT_DOUBLE_EQ(ComputeScore(rarity, mixed, 4, SchedulerVariant::kReachableRarity),
                   (1.0 + 0.5 + 1.0) / 4);
  EXPECT_DOUBLE_EQ(ComputeScore(rarity, mixed, 4, SchedulerVariant::kReachable), 3.0 / 4);
  EXPECT_DOUBLE_EQ(ComputeScore(rarity, mixed, 4, SchedulerVariant::kDirectNeighbours), 1.0 / 4);
  EXPECT_EQ(rarity.total(), 5u);
  EXPECT_EQ(rarity.size(), 4u);
}

TEST(SchedulerTest, ScoreContractViolations) {
  RarityTable rarity;
  ReachabilityResult missing = {{{3, false}, 1}};
  EXPECT_THROW(ComputeScore(rarity, missing, 1, SchedulerVariant::kReachableRarity),
               ContractViolation);
  rarity.Add(missing);
  EXPECT_THROW(ComputeScore(rarity, {{{3, false}, 2}}, 1, SchedulerVariant::kReachableRarity),
               ContractViolation);
  EXPECT_THROW(ComputeScore(rarity, missing, 0, SchedulerVariant::kReachableRarity),
               ContractViolation);
}

TEST(SchedulerTest, AllDepthOneFrequencyOneDegeneratesToDirectCounts) {
  std::mt19937_64 rng(4);
  for (int round = 0; round < 100; ++round) {
    RarityTable rarity;
    ReachabilityResult result;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) result.push_back({{static_cast<uint64_t>(i), rng() % 2 == 0}, 1});
    rarity.Add(result);
    double exec = 1 + static_cast<double>(rng() % 50);
    EXPECT_DOUBLE_EQ(ComputeScore(rarity, result, exec, SchedulerVariant::kReachableRarityDepth),
                     ComputeScore(rarity, result, exec, SchedulerVariant::kDirectNeighbours));
  }
}

TEST(SchedulerTest, SamplingIgnoresScale) {
  std::vector<double> weights = {0.5, 2, 0, 1.5};
  std::vector<double> scaled;
  for (double w : weights) scaled.push_back(w * 1000);
  Rng a(5), b(5);
  std::vector<int> ha(4), hb(4);
  for (int i = 0; i < 50'000; ++i) {
    ++ha[SampleProportional(weights, a)];
    ++hb[SampleProportional(scaled, b)];
  }
  EXPECT_EQ(ha[2], 0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ha[i], hb[i], 10);
}

TEST(SchedulerTest, ZeroScoresSampleUniformly) {
  Rng rng(6);
  std::vector<int> hits(5);
  for (int i = 0; i < 50'000; ++i) ++hits[SampleProportional({0, 0, 0, 0, 0}, rng)];
  for (int h : hits) EXPECT_NEAR(h, 10'000, 500);
}

TEST(SchedulerTest, SingleEntryIsAlwaysChosen) {
  RarityGraph g;
  g.corpus.resize(1);
  ManualClock clock;
  ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarityDepth, *g.index, clock);
  Admit(scheduler, g.corpus);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(scheduler.SelectNext(g.corpus, rng), 0u);
}

TEST(SchedulerTest, NewEntriesGetTheMeanScoreAndTriggerRescoring) {
  RarityGraph g;
  ManualClock clock;
  ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarity, *g.index, clock);
  Corpus corpus = {g.corpus[0]};
  scheduler.OnNewEntry(corpus);
  EXPECT_EQ(scheduler.state().scores, std::vector<double>{1.0});  // first entry
  for (size_t i = 1; i < 4; ++i) {
    corpus.push_back(g.corpus[i]);
    scheduler.OnNewEntry(corpus);
  }
  Rng rng(3);
  scheduler.SelectNext(corpus, rng);
  ASSERT_EQ(scheduler.state().recomputes.size(), 1u);
  EXPECT_FALSE(scheduler.state().dirty);
  const double duration = scheduler.state().last_recompute_duration;
  EXPECT_GT(duration, 0);
  EXPECT_DOUBLE_EQ(scheduler.state().cooldown_until,
                   scheduler.state().recomputes[0].end + 10 * duration);

  // Within the cooldown: mean score, stale scores used.
  CorpusEntry extra = g.corpus[3];
  extra.id = 4;
  corpus.push_back(extra);
  scheduler.OnNewEntry(corpus);
  EXPECT_DOUBLE_EQ(scheduler.state().scores[4], (1.0 / 3 * 3 + 1.0) / 4);
  EXPECT_TRUE(scheduler.state().dirty);
  scheduler.SelectNext(corpus, rng);
  EXPECT_EQ(scheduler.state().recomputes.size(), 1u);

  // After it: the next selection rescores.
  clock.Advance(10 * duration);
  scheduler.SelectNext(corpus, rng);
  EXPECT_EQ(scheduler.state().recomputes.size(), 2u);
  // Now two inputs border N.
  EXPECT_DOUBLE_EQ(scheduler.state().scores[3], 0.5);
  EXPECT_DOUBLE_EQ(scheduler.state().scores[4], 0.5);
}

// Rescoring runs from scratch equal independent per-entry scores computed
// from the brute-force reachability oracle.
TEST(SchedulerTest, RescoringMatchesIndependentScores) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int round = 0; round < 30; ++round) {
    CfgDump dump = InstrumentSources(RandomProgramSources(rng));
    if (dump.latest_coverage_map_index == 0) continue;
    CfgIndex index(dump);
    ManualClock clock;
    ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarityDepth, index, clock);
    Corpus corpus;
    std::vector<uint8_t> global(dump.latest_coverage_map_index, 0);
    for (int i = 0; i < 20; ++i) {
      CorpusEntry entry;
      entry.id = corpus.size();
      entry.exec_time = 1 + rng() % 100;
      std::set<uint32_t> covered;
      int k = 1 + static_cast<int>(rng() % 4);
      for (int c = 0; c < k; ++c) covered.insert(rng() % dump.latest_coverage_map_index);
      entry.covered.assign(covered.begin(), covered.end());
      for (uint32_t c : covered) global[c] = 1;
      corpus.push_back(entry);
      scheduler.OnNewEntry(corpus);
    }
    scheduler.ComputeAllScores(corpus);
    std::map<std::tuple<uint64_t, bool, uint32_t>, int> freq;
    std::vector<ReachabilityResult> oracle;
    for (const CorpusEntry &entry : corpus) {
      oracle.push_back(BruteForceReach(dump, entry.covered, global));
      for (const ReachEntry &e : oracle.back()) ++freq[{e.key.uid, e.key.indirect, e.depth}];
    }
    for (size_t i = 0; i < corpus.size(); ++i) {
      double expected = 0;
      for (const ReachEntry &e : oracle[i]) {
        expected += 1.0 / (e.depth * freq[{e.key.uid, e.key.indirect, e.depth}]);
      }
      expected /= static_cast<double>(corpus[i].exec_time);
      EXPECT_NEAR(scheduler.state().scores[i], expected, 1e-12);
      ++checked;
    }
  }
  EXPECT_GT(checked, 300);
}

// Inputs that each reach one block at depth 1: total probability per block
// is the same whatever the number of inputs bordering it.
TEST(SchedulerTest, RarityEqualisesEffortPerBlock) {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 20; ++round) {
    int targets = 2 + static_cast<int>(rng() % 4);
    int inputs = targets + static_cast<int>(rng() % 8);
    DumpBuilder b;
    std::vector<uint64_t> sources, sinks;
    for (int i = 0; i < inputs; ++i) sources.push_back(b.AddBlock("f", true));
    for (int t = 0; t < targets; ++t) sinks.push_back(b.AddBlock("f", true));
    std::vector<int> target_of(inputs);
    for (int i = 0; i < inputs; ++i) {
      target_of[i] = i < targets ? i : static_cast<int>(rng() % targets);
      b.AddEdge(sources[i], sinks[target_of[i]]);
    }
    CfgIndex index(b.Build());
    ManualClock clock;
    ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarityDepth, index, clock);
    Corpus corpus;
    for (int i = 0; i < inputs; ++i) {
      CorpusEntry entry;
      entry.id = i;
      entry.exec_time = 7;
      entry.covered = {b.Index(sources[i])};
      corpus.push_back(entry);
      scheduler.OnNewEntry(corpus);
    }
    scheduler.ComputeAllScores(corpus);
    const auto &scores = scheduler.state().scores;
    double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    std::vector<double> per_block(targets, 0);
    for (int i = 0; i < inputs; ++i) per_block[target_of[i]] += scores[i] / total;
    for (double p : per_block) EXPECT_NEAR(p, 1.0 / targets, 1e-12);
  }
}

TEST(SchedulerTest, CooldownIsNeverViolated) {
  std::mt19937_64 seed_rng(21);
  for (int round = 0; round < 5; ++round) {
    CfgDump dump = InstrumentSources(RandomProgramSources(seed_rng));
    CfgIndex index(dump);
    ManualClock clock(1.0 + static_cast<double>(seed_rng() % 5));
    ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarityDepth, index, clock);
    Corpus corpus;
    Rng rng(round);
    for (int event = 0; event < 2000; ++event) {
      int kind = static_cast<int>(rng.Below(3));
      if (kind == 0 || corpus.empty()) {
        CorpusEntry entry;
        entry.id = corpus.size();
        entry.covered = {static_cast<uint32_t>(rng.Below(dump.latest_coverage_map_index))};
        entry.exec_time = 1 + rng.Below(20);
        std::vector<double> before = scheduler.state().scores;
        bool cooling = clock.Now() < scheduler.state().cooldown_until;
        corpus.push_back(entry);
        scheduler.OnNewEntry(corpus);
        if (cooling && !before.empty()) {
          double mean = std::accumulate(before.begin(), before.end(), 0.0) / before.size();
          EXPECT_DOUBLE_EQ(scheduler.state().scores.back(), mean);
        }
      } else if (kind == 1) {
        clock.Advance(static_cast<double>(rng.Below(300)));
      } else {
        scheduler.SelectNext(corpus, rng);
      }
    }
    const auto &log = scheduler.state().recomputes;
    EXPECT_GT(log.size(), 3u);
    for (size_t i = 1; i < log.size(); ++i) {
      double previous = log[i - 1].end - log[i - 1].start;
      EXPECT_GE(log[i].start, log[i - 1].end + 10 * previous);
    }
  }
}

TEST(PowerSchedulerTest, FasterShorterDuplicateIsFavored) {
  Corpus corpus(2);
  corpus[0] = {0, {1, 2, 3, 4}, 10, {1, 2}, 0, 0};
  corpus[1] = {1, {1, 2}, 10, {1, 2}, 0, 0};
  EXPECT_EQ(FavoredSubset(corpus), std::vector<size_t>{1});
  corpus[1].exec_time = 100;
  EXPECT_EQ(FavoredSubset(corpus), std::vector<size_t>{0});
}

TEST(PowerSchedulerTest, DisjointEntriesAreAllFavored) {
  Corpus corpus(3);
  corpus[0].covered = {0, 1};
  corpus[1].covered = {2};
  corpus[2].covered = {3, 4};
  EXPECT_EQ(FavoredSubset(corpus), (std::vector<size_t>{0, 1, 2}));
}

TEST(PowerSchedulerTest, EveryArmOfTheWorkedExampleIsFavored) {
  // A, P shared; one distinct arm each.
  Corpus corpus(5);
  for (uint32_t i = 0; i < 5; ++i) {
    corpus[i].covered = {0, i + 1, 12};
    corpus[i].exec_time = 60 + i;
    corpus[i].input.assign(12, 0);
  }
  EXPECT_EQ(FavoredSubset(corpus).size(), 5u);
}

TEST(PowerSchedulerTest, WeightsDoubleWithSelections) {
  Corpus corpus(2);
  corpus[0].covered = {0};
  corpus[1].covered = {1};
  corpus[1].selected_count = 3;
  PowerScheduler scheduler;
  Admit(scheduler, corpus);
  Rng rng(2);
  int second = 0;
  for (int i = 0; i < 90'000; ++i) second += scheduler.SelectNext(corpus, rng) == 1;
  EXPECT_NEAR(second / 90'000.0, 8.0 / 9, 0.01);
  corpus[1].selected_count = 50;  // capped at 2^10
  second = 0;
  for (int i = 0; i < 90'000; ++i) second += scheduler.SelectNext(corpus, rng) == 1;
  EXPECT_NEAR(second / 90'000.0, 1024.0 / 1025, 0.002);
}

TEST(RandomSchedulerTest, Uniform) {
  Corpus corpus(4);
  RandomScheduler scheduler;
  Rng rng(3);
  std::vector<int> hits(4);
  for (int i = 0; i < 40'000; ++i) ++hits[scheduler.SelectNext(corpus, rng)];
  for (int h : hits) EXPECT_NEAR(h, 10'000, 400);
}

}  // namespace
}  // namespace reachfuzz
