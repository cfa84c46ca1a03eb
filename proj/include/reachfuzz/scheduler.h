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

// Corpus schedulers: which corpus entry to mutate next.

#ifndef REACHFUZZ_SCHEDULER_H_
#define REACHFUZZ_SCHEDULER_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reachfuzz/cfg_index.h"
#include "reachfuzz/clock.h"
#include "reachfuzz/corpus.h"
#include "reachfuzz/rng.h"

namespace reachfuzz {

enum class SchedulerVariant {
  kDirectNeighbours,      // count of depth-1 reachable blocks
  kReachable,             // count of all reachable blocks
  kReachableRarity,       // sum of 1/frequency
  kReachableRarityDepth,  // sum of 1/(depth * frequency)
  kRandom,
  kPowerSchedule,
};

// Config names: prescient (alias full), prescient_reachable_rarity,
// prescient_reachable, prescient_direct, random, power.
std::optional<SchedulerVariant> ParseSchedulerVariant(std::string_view name);
std::string_view SchedulerName(SchedulerVariant variant);
bool UsesReachability(SchedulerVariant variant);

// How many corpus entries can reach each (block, depth) pair.
class RarityTable {
 public:
  void Add(const ReachabilityResult &result);
  // 0 when absent.
  uint64_t Count(const ReachEntry &entry) const;
  size_t size() const { return counts_.size(); }
  uint64_t total() const { return total_; }

 private:
  struct KeyHash {
    size_t operator()(const ReachEntry &e) const {
      return std::hash<uint64_t>()(e.key.uid * 0x9E3779B97F4A7C15ULL ^
                                   (uint64_t{e.depth} << 1 | e.key.indirect));
    }
  };
  std::unordered_map<ReachEntry, uint64_t, KeyHash> counts_;
  uint64_t total_ = 0;
};

// Score of one entry with the given reachable blocks. Throws
// ContractViolation when a result entry is missing from `rarity` or
// exec_time is not positive.
double ComputeScore(const RarityTable &rarity, const ReachabilityResult &result, double exec_time,
                    SchedulerVariant variant);

// Picks an index with probability proportional to its weight, uniformly if
// all weights are zero. `weights` must be non-empty.
size_t SampleProportional(const std::vector<double> &weights, Rng &rng);

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  // `corpus.back()` has just been admitted.
  virtual void OnNewEntry(const Corpus &corpus) = 0;
  // Index of the entry to mutate next. The corpus must be non-empty.
  virtual size_t SelectNext(const Corpus &corpus, Rng &rng) = 0;
  virtual SchedulerVariant variant() const = 0;
};

struct ScoreState {
  std::vector<double> scores;  // by corpus index
  double last_recompute_duration = 0;
  double cooldown_until = 0;
  bool dirty = false;
  struct Recompute {
    double start = 0;
    double end = 0;
  };
  std::vector<Recompute> recomputes;
};

// Weights entries by the uncovered blocks they can reach. Full rescoring
// happens lazily on selection, at most once per cooldown period of
// `cooldown_multiplier` times the previous rescoring's duration; entries
// added in between get the mean of the existing scores.
class ReachabilityScheduler : public Scheduler {
 public:
  ReachabilityScheduler(SchedulerVariant variant, CfgIndex &index, Clock &clock,
                        double cooldown_multiplier = 10.0);

  void OnNewEntry(const Corpus &corpus) override;
  size_t SelectNext(const Corpus &corpus, Rng &rng) override;
  SchedulerVariant variant() const override { return variant_; }

  // Recomputes every entry's reachable blocks, the rarity table and all
  // scores, charging the traversal work to the clock.
  void ComputeAllScores(const Corpus &corpus);

  const ScoreState &state() const { return state_; }
  const RarityTable &rarity() const { return rarity_; }
  // Reachable blocks of each entry as of the last rescoring.
  const std::vector<ReachabilityResult> &results() const { return results_; }
  const std::vector<uint8_t> &global_coverage() const { return global_; }

 private:
  SchedulerVariant variant_;
  CfgIndex &index_;
  Clock &clock_;
  double cooldown_multiplier_;
  std::vector<uint8_t> global_;
  ScoreState state_;
  RarityTable rarity_;
  std::vector<ReachabilityResult> results_;
};

class RandomScheduler : public Scheduler {
 public:
  void OnNewEntry(const Corpus &) override {}
  size_t SelectNext(const Corpus &corpus, Rng &rng) override;
  SchedulerVariant variant() const override { return SchedulerVariant::kRandom; }
};

// Favoured entries only: a greedy cover of all covered blocks taken from
// the entries sorted by exec_time * input length. Each favoured entry is
// weighted 2^min(selected_count, 10).
class PowerScheduler : public Scheduler {
 public:
  void OnNewEntry(const Corpus &corpus) override;
  size_t SelectNext(const Corpus &corpus, Rng &rng) override;
  SchedulerVariant variant() const override { return SchedulerVariant::kPowerSchedule; }

  const std::vector<size_t> &favored() const { return favored_; }

 private:
  std::vector<size_t> favored_;
};

// Indices of a greedy cover of all blocks covered by `corpus`.
std::vector<size_t> FavoredSubset(const Corpus &corpus);

// `index` and `clock` are only used by reachability-based variants and
// must outlive the scheduler.
std::unique_ptr<Scheduler> MakeScheduler(SchedulerVariant variant, CfgIndex &index, Clock &clock,
                                         double cooldown_multiplier = 10.0);

}  // namespace reachfuzz

#endif  // REACHFUZZ_SCHEDULER_H_
