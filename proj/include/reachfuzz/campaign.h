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

// The fuzzing loop: select, mutate, execute, keep what finds new coverage.

#ifndef REACHFUZZ_CAMPAIGN_H_
#define REACHFUZZ_CAMPAIGN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "reachfuzz/cfg_dump.h"
#include "reachfuzz/cfg_index.h"
#include "reachfuzz/clock.h"
#include "reachfuzz/corpus.h"
#include "reachfuzz/instrumented_program.h"
#include "reachfuzz/interpreter.h"
#include "reachfuzz/mutator.h"
#include "reachfuzz/program.h"
#include "reachfuzz/rng.h"
#include "reachfuzz/scheduler.h"

namespace reachfuzz {

struct CampaignConfig {
  SchedulerVariant scheduler = SchedulerVariant::kReachableRarityDepth;
  // Executions after the seeds have run.
  uint64_t budget = 100'000;
  uint64_t rng_seed = 0;
  double cooldown_multiplier = 10.0;
  MutatorOptions mutator;
  // Each selected entry is mutated 1..stage_iterations times.
  uint32_t stage_iterations = 32;
  ExecutionOptions execution = {.fuel = 100'000, .max_call_depth = 256, .record_path = false};
  // Empty paths disable persistence.
  std::filesystem::path corpus_dir;
  std::filesystem::path crashes_dir;
  std::filesystem::path cfg_file;
};

// Throws ContractViolation naming the first field that is out of range.
void ValidateConfig(const CampaignConfig &config);

struct StatsSample {
  uint64_t executions = 0;
  uint64_t covered = 0;
  uint64_t corpus_size = 0;
  uint64_t crashes = 0;

  bool operator==(const StatsSample &) const = default;
};

struct CrashRecord {
  uint64_t hash = 0;  // of the covered index set
  uint64_t found_at = 0;  // execution count
  std::vector<uint8_t> input;

  bool operator==(const CrashRecord &) const = default;
};

inline constexpr uint64_t kNever = std::numeric_limits<uint64_t>::max();

struct CampaignStats {
  uint64_t executions = 0;
  uint64_t timeouts = 0;
  // A sample whenever coverage, corpus size or crash count changed, plus
  // the first and last execution.
  std::vector<StatsSample> series;
  std::vector<CrashRecord> crashes;
  // Execution count at which each coverage index was first hit, kNever if
  // it was not.
  std::vector<uint64_t> first_hit;

  uint64_t covered() const { return series.empty() ? 0 : series.back().covered; }
  // Coverage after `executions` executions.
  uint64_t CoveredAt(uint64_t executions) const;
  // First execution count at which at least `count` indices were covered.
  uint64_t ExecutionsToCover(uint64_t count) const;

  bool operator==(const CampaignStats &) const = default;
};

void WriteStatsCsv(const CampaignStats &stats, std::ostream &out);

// Covered-set hash used to bucket crashes.
uint64_t CoverageHash(std::span<const uint32_t> covered);

// Owns one campaign's mutable state. Single-threaded.
class Fuzzer {
 public:
  // `dump` must describe the instrumentation. All references must outlive
  // the fuzzer.
  Fuzzer(const Program &program, const InstrumentedProgram &instrumentation,
         const CfgDump &dump, CampaignConfig config);
  ~Fuzzer();

  struct Outcome {
    ExecutionTrace trace;
    bool admitted = false;
    bool new_crash = false;
  };

  // Executes one input and applies its feedback: admission on new coverage,
  // crash bucketing, statistics. Independent of the scheduler variant.
  Outcome Execute(std::vector<uint8_t> input);

  // Runs every seed (or the empty input when there are none), then fuzzes
  // until the budget is spent. Can be called once.
  const CampaignStats &Run(std::span<const std::vector<uint8_t>> seeds);

  // Receives every CSV row as it is recorded.
  void set_stats_sink(std::ostream *out) { stats_sink_ = out; }
  // Called with every input just before it is executed.
  void set_input_observer(std::function<void(std::span<const uint8_t>)> observer) {
    observer_ = std::move(observer);
  }

  const Corpus &corpus() const { return corpus_; }
  const CampaignStats &stats() const { return stats_; }
  Scheduler &scheduler() { return *scheduler_; }
  const CfgIndex &index() const { return index_; }
  const ManualClock &clock() const { return clock_; }

 private:
  void Record();
  void FuzzSelected(size_t selected, uint64_t limit);
  void Persist() const;

  CampaignConfig config_;
  Interpreter interpreter_;
  CfgIndex index_;
  ManualClock clock_;
  Rng rng_;
  Mutator mutator_;
  std::unique_ptr<Scheduler> scheduler_;
  Corpus corpus_;
  std::vector<uint8_t> global_;
  uint64_t covered_ = 0;
  std::vector<uint64_t> crash_hashes_;
  CampaignStats stats_;
  std::ostream *stats_sink_ = nullptr;
  std::function<void(std::span<const uint8_t>)> observer_;
  bool ran_ = false;
};

// Convenience wrapper: one Fuzzer, run to completion.
CampaignStats RunCampaign(const Program &program, const InstrumentedProgram &instrumentation,
                          const CfgDump &dump, std::span<const std::vector<uint8_t>> seeds,
                          const CampaignConfig &config, Corpus *corpus = nullptr);

// Corpus persistence: one raw file per entry plus index.json.
void SaveCorpus(const Corpus &corpus, const std::filesystem::path &dir);
Corpus LoadCorpus(const std::filesystem::path &dir);

}  // namespace reachfuzz

#endif  // REACHFUZZ_CAMPAIGN_H_
