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

#include "reachfuzz/campaign.h"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "fmt/format.h"
#include "json.hpp"
#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

constexpr char kStatsHeader[] = "executions,covered,corpus_size,crashes";

void WriteBytes(const std::filesystem::path &path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<uint8_t> ReadBytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string EntryFileName(uint64_t id) { return fmt::format("id-{:06d}", id); }

void WriteRow(std::ostream &out, const StatsSample &s) {
  out << s.executions << ',' << s.covered << ',' << s.corpus_size << ',' << s.crashes << '\n';
}

}  // namespace

void ValidateConfig(const CampaignConfig &config) {
  if (!(config.cooldown_multiplier > 0)) {
    throw ContractViolation("cooldown_multiplier must be positive");
  }
  if (config.stage_iterations == 0) throw ContractViolation("stage_iterations must be positive");
  if (config.execution.fuel == 0) throw ContractViolation("fuel must be positive");
  if (config.execution.max_call_depth == 0) {
    throw ContractViolation("max_call_depth must be positive");
  }
  Mutator check(config.mutator);
}

uint64_t CampaignStats::CoveredAt(uint64_t executions) const {
  auto it = std::upper_bound(series.begin(), series.end(), executions,
                             [](uint64_t e, const StatsSample &s) { return e < s.executions; });
  return it == series.begin() ? 0 : std::prev(it)->covered;
}

uint64_t CampaignStats::ExecutionsToCover(uint64_t count) const {
  for (const StatsSample &s : series) {
    if (s.covered >= count) return s.executions;
  }
  return kNever;
}

void WriteStatsCsv(const CampaignStats &stats, std::ostream &out) {
  out << kStatsHeader << '\n';
  for (const StatsSample &s : stats.series) WriteRow(out, s);
}

uint64_t CoverageHash(std::span<const uint32_t> covered) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint32_t index : covered) {
    for (int i = 0; i < 4; ++i) {
      h ^= (index >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

Fuzzer::Fuzzer(const Program &program, const InstrumentedProgram &instrumentation,
               const CfgDump &dump, CampaignConfig config)
    : config_(std::move(config)),
      interpreter_(program, instrumentation),
      index_(dump),
      rng_(config_.rng_seed),
      mutator_(config_.mutator) {
  ValidateConfig(config_);
  if (instrumentation.map_size() != index_.map_size()) {
    throw ChecksumMismatchError("CFG dump and instrumentation disagree on the coverage map size");
  }
  scheduler_ = MakeScheduler(config_.scheduler, index_, clock_, config_.cooldown_multiplier);
  global_.assign(index_.map_size(), 0);
  stats_.first_hit.assign(index_.map_size(), kNever);
}

Fuzzer::~Fuzzer() = default;

Fuzzer::Outcome Fuzzer::Execute(std::vector<uint8_t> input) {
  if (observer_) observer_(input);
  Outcome outcome;
  outcome.trace = interpreter_.Run(input, config_.execution);
  const ExecutionTrace &trace = outcome.trace;
  ++stats_.executions;
  clock_.Charge(static_cast<double>(trace.steps));
  if (trace.timed_out) {
    ++stats_.timeouts;
    if (stats_.series.empty()) Record();
    return outcome;
  }

  bool new_coverage = false;
  for (uint32_t index : trace.covered_indices) {
    if (global_[index]) continue;
    global_[index] = 1;
    stats_.first_hit[index] = stats_.executions;
    ++covered_;
    new_coverage = true;
  }

  if (trace.crashed) {
    // Crashing inputs count towards coverage but are never mutated further.
    uint64_t hash = CoverageHash(trace.covered_indices);
    if (std::find(crash_hashes_.begin(), crash_hashes_.end(), hash) == crash_hashes_.end()) {
      crash_hashes_.push_back(hash);
      if (!config_.crashes_dir.empty()) {
        std::filesystem::create_directories(config_.crashes_dir);
        WriteBytes(config_.crashes_dir / fmt::format("crash-{:016x}", hash), input);
      }
      stats_.crashes.push_back({hash, stats_.executions, std::move(input)});
      outcome.new_crash = true;
    }
  } else if (new_coverage) {
    CorpusEntry entry;
    entry.id = corpus_.size();
    entry.input = std::move(input);
    entry.exec_time = std::max<uint64_t>(1, trace.steps);
    entry.covered = trace.covered_indices;
    entry.discovered_at = stats_.executions;
    corpus_.push_back(std::move(entry));
    scheduler_->OnNewEntry(corpus_);
    outcome.admitted = true;
  }
  if (new_coverage || outcome.new_crash || stats_.series.empty()) Record();
  return outcome;
}

void Fuzzer::Record() {
  StatsSample sample{stats_.executions, covered_, corpus_.size(), stats_.crashes.size()};
  if (stats_sink_) {
    if (stats_.series.empty()) *stats_sink_ << kStatsHeader << '\n';
    WriteRow(*stats_sink_, sample);
  }
  stats_.series.push_back(sample);
}

void Fuzzer::FuzzSelected(size_t selected, uint64_t limit) {
  ++corpus_[selected].selected_count;
  const std::vector<uint8_t> base = corpus_[selected].input;
  const uint64_t iterations = 1 + rng_.Below(config_.stage_iterations);
  for (uint64_t i = 0; i < iterations && stats_.executions < limit; ++i) {
    Execute(mutator_.Mutate(base, corpus_, rng_));
  }
}

const CampaignStats &Fuzzer::Run(std::span<const std::vector<uint8_t>> seeds) {
  if (ran_) throw ContractViolation("Fuzzer::Run called twice");
  ran_ = true;
  if (seeds.empty()) {
    Execute({});
  } else {
    for (const std::vector<uint8_t> &seed : seeds) Execute(seed);
  }
  const uint64_t limit = stats_.executions + config_.budget;
  while (stats_.executions < limit) {
    if (corpus_.empty()) {
      Execute(mutator_.Mutate({}, corpus_, rng_));
      continue;
    }
    FuzzSelected(scheduler_->SelectNext(corpus_, rng_), limit);
  }
  if (stats_.series.back().executions != stats_.executions) Record();
  if (!config_.corpus_dir.empty()) SaveCorpus(corpus_, config_.corpus_dir);
  return stats_;
}

CampaignStats RunCampaign(const Program &program, const InstrumentedProgram &instrumentation,
                          const CfgDump &dump, std::span<const std::vector<uint8_t>> seeds,
                          const CampaignConfig &config, Corpus *corpus) {
  Fuzzer fuzzer(program, instrumentation, dump, config);
  CampaignStats stats = fuzzer.Run(seeds);
  if (corpus) *corpus = fuzzer.corpus();
  return stats;
}

void SaveCorpus(const Corpus &corpus, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  for (const CorpusEntry &entry : corpus) {
    std::string file = EntryFileName(entry.id);
    WriteBytes(dir / file, entry.input);
    index.push_back({{"id", entry.id},
                     {"file", file},
                     {"exec_time", entry.exec_time},
                     {"covered", entry.covered},
                     {"discovered_at", entry.discovered_at},
                     {"selected_count", entry.selected_count}});
  }
  std::ofstream out(dir / "index.json", std::ios::trunc);
  out << index.dump(1) << '\n';
  if (!out) throw Error("cannot write " + (dir / "index.json").string());
}

Corpus LoadCorpus(const std::filesystem::path &dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw Error("cannot open " + (dir / "index.json").string());
  Corpus corpus;
  try {
    for (const auto &item : nlohmann::json::parse(in)) {
      CorpusEntry entry;
      entry.id = item.at("id").get<uint64_t>();
      entry.input = ReadBytes(dir / item.at("file").get<std::string>());
      entry.exec_time = item.at("exec_time").get<uint64_t>();
      entry.covered = item.at("covered").get<std::vector<uint32_t>>();
      entry.discovered_at = item.at("discovered_at").get<uint64_t>();
      entry.selected_count = item.at("selected_count").get<uint64_t>();
      corpus.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error((dir / "index.json").string() + ": malformed corpus index: " + e.what());
  }
  return corpus;
}

}  // namespace reachfuzz
