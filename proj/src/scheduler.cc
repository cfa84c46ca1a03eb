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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reachfuzz/error.h"

namespace reachfuzz {

std::optional<SchedulerVariant> ParseSchedulerVariant(std::string_view name) {
  if (name == "prescient" || name == "full") return SchedulerVariant::kReachableRarityDepth;
  if (name == "prescient_reachable_rarity") return SchedulerVariant::kReachableRarity;
  if (name == "prescient_reachable") return SchedulerVariant::kReachable;
  if (name == "prescient_direct") return SchedulerVariant::kDirectNeighbours;
  if (name == "random") return SchedulerVariant::kRandom;
  if (name == "power") return SchedulerVariant::kPowerSchedule;
  return std::nullopt;
}

std::string_view SchedulerName(SchedulerVariant variant) {
  switch (variant) {
    case SchedulerVariant::kDirectNeighbours: return "prescient_direct";
    case SchedulerVariant::kReachable: return "prescient_reachable";
    case SchedulerVariant::kReachableRarity: return "prescient_reachable_rarity";
    case SchedulerVariant::kReachableRarityDepth: return "prescient";
    case SchedulerVariant::kRandom: return "random";
    case SchedulerVariant::kPowerSchedule: return "power";
  }
  return "?";
}

bool UsesReachability(SchedulerVariant variant) {
  return variant != SchedulerVariant::kRandom && variant != SchedulerVariant::kPowerSchedule;
}

void RarityTable::Add(const ReachabilityResult &result) {
  for (const ReachEntry &entry : result) ++counts_[entry];
  total_ += result.size();
}

uint64_t RarityTable::Count(const ReachEntry &entry) const {
  auto it = counts_.find(entry);
  return it == counts_.end() ? 0 : it->second;
}

double ComputeScore(const RarityTable &rarity, const ReachabilityResult &result, double exec_time,
                    SchedulerVariant variant) {
  if (!(exec_time > 0)) throw ContractViolation("execution time must be positive");
  double sum = 0;
  for (const ReachEntry &entry : result) {
    uint64_t freq = rarity.Count(entry);
    if (freq == 0) {
      throw ContractViolation("reachable block " + std::to_string(entry.key.uid) +
                              " missing from the rarity table");
    }
    switch (variant) {
      case SchedulerVariant::kDirectNeighbours:
        sum += entry.depth == 1 ? 1.0 : 0.0;
        break;
      case SchedulerVariant::kReachable:
        sum += 1.0;
        break;
      case SchedulerVariant::kReachableRarity:
        sum += 1.0 / static_cast<double>(freq);
        break;
      case SchedulerVariant::kReachableRarityDepth:
        sum += 1.0 / (static_cast<double>(entry.depth) * static_cast<double>(freq));
        break;
      default:
        throw ContractViolation("scheduler variant does not score reachability");
    }
  }
  return sum / exec_time;
}

size_t SampleProportional(const std::vector<double> &weights, Rng &rng) {
  double total = 0;
  for (double w : weights) total += w;
  if (!(total > 0)) return rng.Below(weights.size());
  double target = rng.Uniform01() * total;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (target < weights[i]) return i;
    target -= weights[i];
  }
  // Rounding left a sliver past the end; give it to the last positive weight.
  for (size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  return weights.size() - 1;
}

ReachabilityScheduler::ReachabilityScheduler(SchedulerVariant variant, CfgIndex &index,
                                             Clock &clock, double cooldown_multiplier)
    : variant_(variant),
      index_(index),
      clock_(clock),
      cooldown_multiplier_(cooldown_multiplier),
      global_(index.map_size(), 0) {
  if (!UsesReachability(variant)) {
    throw ContractViolation("variant " + std::string(SchedulerName(variant)) +
                            " does not use reachability");
  }
}

void ReachabilityScheduler::OnNewEntry(const Corpus &corpus) {
  const CorpusEntry &entry = corpus.back();
  // May switch a function to another definition; the rescoring that the
  // dirty flag below schedules picks that up.
  index_.ObserveCoverage(entry.covered);
  for (uint32_t index : entry.covered) {
    if (index >= global_.size()) {
      throw InconsistentBuildError("coverage index " + std::to_string(index) +
                                   " outside the CFG dump");
    }
    global_[index] = 1;
  }
  const std::vector<double> &scores = state_.scores;
  double mean = scores.empty()
                    ? 1.0
                    : std::accumulate(scores.begin(), scores.end(), 0.0) /
                          static_cast<double>(scores.size());
  state_.scores.push_back(mean);
  results_.emplace_back();
  state_.dirty = true;
}

void ReachabilityScheduler::ComputeAllScores(const Corpus &corpus) {
  const double start = clock_.Now();
  results_.assign(corpus.size(), {});
  rarity_ = RarityTable();
  size_t work = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    size_t w = 0;
    results_[i] = index_.CalcReachableBlocks(corpus[i].covered, global_, &w);
    work += w;
    rarity_.Add(results_[i]);
  }
  state_.scores.resize(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    work += results_[i].size();
    state_.scores[i] = ComputeScore(rarity_, results_[i],
                                    static_cast<double>(std::max<uint64_t>(corpus[i].exec_time, 1)),
                                    variant_);
  }
  clock_.Charge(static_cast<double>(work));
  const double end = clock_.Now();
  state_.last_recompute_duration = end - start;
  state_.cooldown_until = end + cooldown_multiplier_ * state_.last_recompute_duration;
  state_.dirty = false;
  state_.recomputes.push_back({start, end});
}

size_t ReachabilityScheduler::SelectNext(const Corpus &corpus, Rng &rng) {
  if (corpus.empty()) throw ContractViolation("selection from an empty corpus");
  if (state_.dirty && clock_.Now() >= state_.cooldown_until) ComputeAllScores(corpus);
  return SampleProportional(state_.scores, rng);
}

size_t RandomScheduler::SelectNext(const Corpus &corpus, Rng &rng) {
  if (corpus.empty()) throw ContractViolation("selection from an empty corpus");
  return rng.Below(corpus.size());
}

std::vector<size_t> FavoredSubset(const Corpus &corpus) {
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  auto cost = [&](size_t i) {
    return static_cast<double>(corpus[i].exec_time) *
           static_cast<double>(std::max<size_t>(corpus[i].input.size(), 1));
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return cost(a) < cost(b); });
  uint32_t max_index = 0;
  for (const CorpusEntry &entry : corpus) {
    if (!entry.covered.empty()) max_index = std::max(max_index, entry.covered.back());
  }
  std::vector<uint8_t> done(static_cast<size_t>(max_index) + 1, 0);
  std::vector<size_t> favored;
  for (size_t i : order) {
    bool adds = false;
    for (uint32_t index : corpus[i].covered) {
      if (!done[index]) {
        done[index] = 1;
        adds = true;
      }
    }
    if (adds) favored.push_back(i);
  }
  std::sort(favored.begin(), favored.end());
  return favored;
}

void PowerScheduler::OnNewEntry(const Corpus &corpus) { favored_ = FavoredSubset(corpus); }

size_t PowerScheduler::SelectNext(const Corpus &corpus, Rng &rng) {
  if (corpus.empty()) throw ContractViolation("selection from an empty corpus");
  if (favored_.empty()) return rng.Below(corpus.size());
  std::vector<double> weights;
  weights.reserve(favored_.size());
  for (size_t i : favored_) {
    weights.push_back(std::ldexp(1.0, static_cast<int>(std::min<uint64_t>(corpus[i].selected_count, 10))));
  }
  return favored_[SampleProportional(weights, rng)];
}

std::unique_ptr<Scheduler> MakeScheduler(SchedulerVariant variant, CfgIndex &index, Clock &clock,
                                         double cooldown_multiplier) {
  switch (variant) {
    case SchedulerVariant::kRandom: return std::make_unique<RandomScheduler>();
    case SchedulerVariant::kPowerSchedule: return std::make_unique<PowerScheduler>();
    default:
      return std::make_unique<ReachabilityScheduler>(variant, index, clock, cooldown_multiplier);
  }
}

}  // namespace reachfuzz
