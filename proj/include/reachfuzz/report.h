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

// Repeated campaigns over a target suite and the statistics that compare
// schedulers on them.

#ifndef REACHFUZZ_REPORT_H_
#define REACHFUZZ_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reachfuzz/campaign.h"
#include "reachfuzz/scheduler.h"
#include "reachfuzz/target.h"

namespace reachfuzz {

// Vargha-Delaney effect size: the probability that a draw from `a` exceeds
// one from `b`, ties counting half. Throws ContractViolation on an empty
// sample.
double A12(std::span<const double> a, std::span<const double> b);

// Median of a non-empty sample; the mean of the middle pair for even sizes.
double Median(std::vector<double> sample);

struct TrialMatrix {
  std::vector<std::string> targets;
  std::vector<SchedulerVariant> schedulers;
  uint32_t trials = 0;
  uint64_t budget = 0;
  uint64_t base_seed = 0;
  // cells[target][scheduler][trial]; empty when the campaign failed.
  std::vector<std::vector<std::vector<std::optional<CampaignStats>>>> cells;
  // One line per failed campaign.
  std::vector<std::string> failures;

  const std::optional<CampaignStats> &at(size_t target, size_t scheduler, size_t trial) const {
    return cells[target][scheduler][trial];
  }
  bool operator==(const TrialMatrix &) const = default;
};

struct BenchmarkOptions {
  std::vector<SchedulerVariant> schedulers;
  uint32_t trials = 10;
  uint64_t budget = 100'000;
  uint64_t base_seed = 0;
  // 0 picks the hardware concurrency.
  unsigned threads = 0;
  // Settings shared by every campaign; each target's own settings are
  // applied on top, then scheduler, budget and seed.
  CampaignConfig base;
  // Called after each campaign from the worker that ran it.
  std::function<void(size_t done, size_t total)> progress;
};

// Runs every (target, scheduler, trial) campaign. Trial t uses rng seed
// base_seed + t under every scheduler. The result does not depend on the
// thread count.
TrialMatrix RunBenchmark(std::span<const Target> suite, const BenchmarkOptions &options);

struct RelativeTable {
  std::vector<uint64_t> checkpoints;
  std::vector<SchedulerVariant> schedulers;
  // rows[checkpoint][scheduler], in percent.
  std::vector<std::vector<double>> rows;
};

// At each checkpoint: the median coverage of every (target, scheduler) cell,
// as a percentage of the best median on that target, averaged over targets.
RelativeTable RelativeMedianTable(const TrialMatrix &matrix, std::span<const uint64_t> checkpoints);

// Final coverage of every trial of a cell that completed.
std::vector<double> FinalCoverage(const TrialMatrix &matrix, size_t target, size_t scheduler);

// Coverage goal of a target: ceil(fraction * the highest final coverage of
// any completed campaign on it).
uint64_t CoverageGoal(const TrialMatrix &matrix, size_t target, double fraction);

// Executions each completed trial of a cell needed to reach `goal`;
// infinity for trials that never did.
std::vector<double> ExecutionsToGoal(const TrialMatrix &matrix, size_t target, size_t scheduler,
                                     uint64_t goal);

// A12 of scheduler `a` over `b` where fewer executions to the 90% goal is
// better. Throws ContractViolation when either cell has no completed trial.
double A12ExecutionsToNinety(const TrialMatrix &matrix, size_t target, size_t a, size_t b);

void WriteMatrixCsv(const TrialMatrix &matrix, std::ostream &out);
// A12 on final coverage and on executions to the 90% goal, for every
// ordered pair of schedulers per target.
void WriteA12Csv(const TrialMatrix &matrix, std::ostream &out);
void WriteRelativeCsv(const RelativeTable &table, std::ostream &out);
// Median coverage over executions, one line per scheduler.
std::string CoverageSvg(const TrialMatrix &matrix, size_t target);

// Lossless JSON form, read back by the report command.
void SaveMatrix(const TrialMatrix &matrix, const std::filesystem::path &path);
TrialMatrix LoadMatrix(const std::filesystem::path &path);

// Writes matrix.json, matrix.csv, a12.csv, relative.csv and one
// coverage_<target>.svg per target into `dir`. Default checkpoints are
// 10%, 25%, 50% and 100% of the budget.
void WriteReport(const TrialMatrix &matrix, const std::filesystem::path &dir,
                 std::vector<uint64_t> checkpoints = {});

}  // namespace reachfuzz

#endif  // REACHFUZZ_REPORT_H_
