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

// End-to-end acceptance checks. Each prints one PASS or FAIL line; the exit
// status is nonzero when any selected check fails.
//
//   acceptance_test [N]   runs check N only, or all of them

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fmt/format.h"
#include "reachfuzz/campaign.h"
#include "reachfuzz/cfg_dump.h"
#include "reachfuzz/cfg_index.h"
#include "reachfuzz/cfg_store.h"
#include "reachfuzz/clock.h"
#include "reachfuzz/config.h"
#include "reachfuzz/instr_pass.h"
#include "reachfuzz/ir_parser.h"
#include "reachfuzz/report.h"
#include "reachfuzz/rng.h"
#include "reachfuzz/scheduler.h"
#include "support/test_support.h"

namespace reachfuzz {
namespace {

using namespace ::reachfuzz::testing;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

ReachabilityResult Sorted(ReachabilityResult r) {
  std::sort(r.begin(), r.end());
  return r;
}

// 1. Reachable blocks of the worked example.
Verdict WorkedExampleReach() {
  BuiltProgram built = BuildProgramFromFile(TestDataPath("worked_example.mir"));
  auto indices = [&](const std::string &labels) {
    std::vector<uint32_t> out;
    for (char c : labels) out.push_back(static_cast<uint32_t>(built.Index("main", {c})));
    return out;
  };
  CfgIndex index(built.dump);
  std::vector<uint8_t> global(index.map_size(), 0);
  for (uint32_t i : indices("ABCDEFP")) global[i] = 1;

  auto start = Clock::now();
  ReachabilityResult else_arm = index.CalcReachableBlocks(indices("AFP"), global);
  double millis = Seconds(start) * 1e3;
  ReachabilityResult first_arm = index.CalcReachableBlocks(indices("ABP"), global);

  ReachabilityResult expected;
  for (auto [label, depth] : std::vector<std::pair<char, uint32_t>>{
           {'G', 1}, {'H', 2}, {'J', 2}, {'K', 2}, {'L', 2}, {'N', 2}}) {
    expected.push_back({{built.Uid("main", {label}), false}, depth});
  }
  bool exact = else_arm == expected && first_arm.empty();
  return {exact && millis < 1.0,
          fmt::format("{{A,F,P}} -> {} entries (expected 6, exact match {}), {{A,B,P}} -> {} "
                      "entries, cold query {:.3f} ms",
                      else_arm.size(), exact ? "yes" : "no", first_arm.size(), millis)};
}

// 2. Rarity weights and selection frequencies of the four-input example.
Verdict RarityExample() {
  RarityGraph g;
  ManualClock clock;
  ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarity, *g.index, clock);
  Corpus grown;
  for (const CorpusEntry &entry : g.corpus) {
    grown.push_back(entry);
    scheduler.OnNewEntry(grown);
  }
  scheduler.ComputeAllScores(g.corpus);
  const std::vector<double> &scores = scheduler.state().scores;
  const std::vector<double> weights = {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0};
  bool weights_ok = scores.size() == 4;
  for (size_t i = 0; weights_ok && i < 4; ++i) {
    weights_ok = std::abs(scores[i] - weights[i]) < 1e-12;
  }

  Rng rng(2024);
  constexpr int kDraws = 100'000;
  std::vector<int> hits(4, 0);
  for (int i = 0; i < kDraws; ++i) ++hits[scheduler.SelectNext(g.corpus, rng)];
  const double expected[] = {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 2};
  double worst = 0;
  for (int i = 0; i < 4; ++i) {
    worst = std::max(worst, std::abs(hits[i] / double(kDraws) - expected[i]) / expected[i]);
  }
  return {weights_ok && worst <= 0.02,
          fmt::format("weights {:.4f} {:.4f} {:.4f} {:.4f}, frequencies {:.4f} {:.4f} {:.4f} "
                      "{:.4f}, worst relative error {:.2f}%",
                      scores.size() > 3 ? scores[0] : -1, scores.size() > 3 ? scores[1] : -1,
                      scores.size() > 3 ? scores[2] : -1, scores.size() > 3 ? scores[3] : -1,
                      hits[0] / double(kDraws), hits[1] / double(kDraws),
                      hits[2] / double(kDraws), hits[3] / double(kDraws), worst * 100)};
}

// 3. Cached reachability against the breadth-first oracle.
Verdict ReachabilityOracle() {
  std::mt19937_64 rng(3);
  std::mt19937_64 coverage_rng(33);
  int graphs = 0, queries = 0, mismatches = 0, with_indirect = 0, with_duplicates = 0;
  while (graphs < 250) {
    CfgDump dump = InstrumentSources(RandomProgramSources(rng));
    ++graphs;
    bool indirect = false, duplicates = false;
    for (const auto &[name, definitions] : dump.functions) {
      duplicates |= definitions.size() > 1;
      for (const auto &def : definitions) {
        for (const auto &bb : def.blocks) indirect |= bb.num_indirect_calls > 0;
      }
    }
    with_indirect += indirect;
    with_duplicates += duplicates;
    CfgIndex index(dump);
    for (int q = 0; q < 4; ++q) {
      RandomCoverage coverage = RandomCoverageFor(dump, coverage_rng);
      if (coverage.per_input.empty()) continue;
      ++queries;
      if (Sorted(index.CalcReachableBlocks(coverage.per_input, coverage.global)) !=
          BruteForceReach(dump, coverage.per_input, coverage.global)) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0 && graphs >= 200 && with_indirect > 0 && with_duplicates > 0,
          fmt::format("{} graphs ({} with indirect calls, {} with duplicate definitions), "
                      "{} queries, {} mismatches",
                      graphs, with_indirect, with_duplicates, queries, mismatches)};
}

// 4. Full paths are recoverable from their instrumented blocks.
Verdict Reconstruction() {
  std::mt19937_64 rng(3);
  int functions = 0, paths = 0, collisions = 0, chains = 0, not_strict = 0, over = 0;
  int branching = 0, walks = 0, walk_collisions = 0;
  std::mt19937_64 walk_rng(4);  // keeps the program population equal to check 3's
  for (int round = 0; round < 250; ++round) {
    for (const std::string &source : RandomProgramSources(rng)) {
      IrModule module = ParseModule(source);
      for (const IrFunction &fn : module.functions) {
        ++functions;
        std::vector<bool> plan = InstrumentationPlan(fn);
        std::map<std::vector<int32_t>, std::vector<int32_t>> seen;
        for (const auto &path : EnumerateFullPaths(fn)) {
          ++paths;
          std::vector<int32_t> projected;
          for (int32_t b : path) {
            if (plan[b]) projected.push_back(b);
          }
          auto [it, inserted] = seen.emplace(projected, path);
          if (it->second != path) ++collisions;
        }
        branching += seen.size() > 1;
        // Walks through loops lose repetition counts but never which blocks
        // they visited.
        std::map<std::set<int32_t>, std::set<int32_t>> visited;
        for (int w = 0; w < 200; ++w) {
          std::vector<int32_t> walk{0};
          std::vector<int32_t> succs = fn.blocks[0].terminator.Successors();
          while (!succs.empty() && walk.size() < 40) {
            walk.push_back(succs[walk_rng() % succs.size()]);
            succs = fn.blocks[walk.back()].terminator.Successors();
          }
          if (!succs.empty()) continue;
          ++walks;
          std::set<int32_t> all(walk.begin(), walk.end()), projected;
          for (int32_t b : walk) {
            if (plan[b]) projected.insert(b);
          }
          auto [it, inserted] = visited.emplace(projected, all);
          if (it->second != all) ++walk_collisions;
        }
        std::vector<int> preds(fn.blocks.size(), 0);
        for (const IrBlock &block : fn.blocks) {
          for (int32_t s : block.terminator.Successors()) ++preds[s];
        }
        bool has_chain = false;
        for (size_t b = 0; b < fn.blocks.size(); ++b) {
          auto succs = fn.blocks[b].terminator.Successors();
          has_chain |= succs.size() == 1 && succs[0] != static_cast<int32_t>(b) &&
                       succs[0] != 0 && preds[succs[0]] == 1;
        }
        size_t instrumented = std::count(plan.begin(), plan.end(), true);
        over += instrumented > fn.blocks.size();
        chains += has_chain;
        not_strict += has_chain && instrumented >= fn.blocks.size();
      }
    }
  }
  return {collisions == 0 && walk_collisions == 0 && over == 0 && not_strict == 0,
          fmt::format("{} functions ({} with several), {} loop-free full paths, {} projection "
                      "collisions; {} looping walks to an exit, {} visited-set collisions; "
                      "{} functions with chains, {} without a saving",
                      functions, branching, paths, collisions, walks, walk_collisions, chains,
                      not_strict)};
}

// 5. Dump round trips and two concurrent instrument processes.
Verdict DumpRoundTripAndConcurrency() {
  std::mt19937_64 rng(5);
  int round_trip_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    CfgDump dump = RandomCfgDump(rng);
    std::vector<uint8_t> bytes = SerializeCfgDump(dump);
    CfgDump back = DeserializeCfgDump(bytes);
    if (!(back == dump) || SerializeCfgDump(back) != bytes) ++round_trip_failures;
  }

  constexpr int kRounds = 10;
  int contiguous = 0;
  std::string problem;
  for (int round = 0; round < kRounds; ++round) {
    TempDir dir;
    std::vector<std::vector<std::string>> files(2);
    uint64_t total_blocks = 0;
    for (int p = 0; p < 2; ++p) {
      for (int m = 0; m < 4; ++m) {
        std::string name = fmt::format("p{}_{}.mir", p, m);
        std::string source = RandomProgramSources(rng, {.duplicate_probability = 0})[0];
        for (const IrFunction &fn : ParseModule(source).functions) total_blocks += fn.blocks.size();
        std::ofstream(dir / name) << source;
        files[p].push_back(name);
      }
    }
    std::vector<CliProcess> processes;
    for (int p = 0; p < 2; ++p) {
      std::vector<std::string> args = {"instrument"};
      args.insert(args.end(), files[p].begin(), files[p].end());
      args.insert(args.end(), {"--cfg-out", "shared.cfg"});
      processes.push_back(StartCli(args, dir.path(), std::to_string(p)));
    }
    bool ok = true;
    for (const CliProcess &process : processes) {
      CommandResult result = WaitCli(process);
      if (result.exit_code != 0) {
        ok = false;
        problem = result.err;
      }
    }
    if (!ok) continue;
    CfgDump dump = ReadCfgDump(dir / "shared.cfg");
    std::set<uint64_t> uids;
    for (const auto &[name, definitions] : dump.functions) {
      for (const auto &def : definitions) {
        for (const auto &bb : def.blocks) uids.insert(bb.uid);
      }
    }
    ValidateCfgDump(dump);
    if (uids.size() == total_blocks && dump.latest_block_uid == total_blocks &&
        *uids.rbegin() == total_blocks - 1 && dump.modules.size() == 8) {
      ++contiguous;
    }
  }
  return {round_trip_failures == 0 && contiguous == kRounds,
          fmt::format("{} of 1000 random dumps failed to round trip byte-stably; {}/{} rounds of "
                      "two concurrent instrument processes gave contiguous uids{}",
                      round_trip_failures, contiguous, kRounds,
                      problem.empty() ? "" : " (" + problem + ")")};
}

// 6. Rescoring respects the cooldown; entries admitted during it get the
// mean score.
Verdict Cooldown() {
  std::mt19937_64 seed_rng(6);
  int sequences = 0, recomputes = 0, violations = 0, cooled = 0, mean_mismatches = 0;
  for (int round = 0; round < 3; ++round) {
    CfgDump dump = InstrumentSources(RandomProgramSources(seed_rng));
    CfgIndex index(dump);
    ManualClock clock(1.0 + static_cast<double>(seed_rng() % 5));
    ReachabilityScheduler scheduler(SchedulerVariant::kReachableRarityDepth, index, clock);
    Corpus corpus;
    Rng rng(round);
    while (corpus.size() < 10'000) {
      uint64_t kind = rng.Below(3);
      if (kind == 0 || corpus.empty()) {
        CorpusEntry entry;
        entry.id = corpus.size();
        entry.covered = {static_cast<uint32_t>(rng.Below(dump.latest_coverage_map_index))};
        entry.exec_time = 1 + rng.Below(20);
        bool cooling = clock.Now() < scheduler.state().cooldown_until;
        const std::vector<double> &scores = scheduler.state().scores;
        double mean = scores.empty() ? 0
                                     : std::accumulate(scores.begin(), scores.end(), 0.0) /
                                           static_cast<double>(scores.size());
        corpus.push_back(std::move(entry));
        scheduler.OnNewEntry(corpus);
        if (cooling && corpus.size() > 1) {
          ++cooled;
          if (std::abs(scheduler.state().scores.back() - mean) > 1e-12 * std::max(1.0, mean)) {
            ++mean_mismatches;
          }
        }
      } else if (kind == 1) {
        clock.Advance(static_cast<double>(rng.Below(3000)));
      } else {
        scheduler.SelectNext(corpus, rng);
      }
    }
    const auto &log = scheduler.state().recomputes;
    recomputes += static_cast<int>(log.size());
    for (size_t i = 1; i < log.size(); ++i) {
      double previous = log[i - 1].end - log[i - 1].start;
      if (log[i].start < log[i - 1].end + 10 * previous) ++violations;
    }
    ++sequences;
  }
  return {violations == 0 && mean_mismatches == 0 && recomputes > 3 && cooled > 0,
          fmt::format("{} sequences of 10^4 admissions: {} recomputations, {} inside a "
                      "cooldown; {} admissions during cooldown, {} without the mean score",
                      sequences, recomputes, violations, cooled, mean_mismatches)};
}

constexpr uint64_t kSuiteBudget = 200'000;
constexpr uint32_t kSuiteTrials = 10;

// 7. Full scheduler against random on the target suite.
Verdict SuiteEffectiveness() {
  auto start = Clock::now();
  std::vector<Target> suite = LoadSuite(TargetsPath(""));
  BenchmarkOptions options;
  options.schedulers = {SchedulerVariant::kReachableRarityDepth, SchedulerVariant::kRandom};
  options.trials = kSuiteTrials;
  options.budget = kSuiteBudget;
  options.base_seed = 1000;
  TrialMatrix matrix = RunBenchmark(suite, options);
  double seconds = Seconds(start);
  int good = 0, bad = 0;
  std::string scores;
  for (size_t t = 0; t < matrix.targets.size(); ++t) {
    double a12 = A12ExecutionsToNinety(matrix, t, 0, 1);
    good += a12 >= 0.6;
    bad += a12 < 0.4;
    scores += fmt::format(" {}={:.2f}", matrix.targets[t], a12);
  }
  bool pass = matrix.targets.size() == 6 && matrix.failures.empty() && good >= 4 && bad == 0 &&
              seconds < 15 * 60;
  return {pass, fmt::format("A12 on executions to 90% coverage:{}; {} of {} at least 0.6, {} "
                            "below 0.4, {:.0f} s",
                            scores, good, matrix.targets.size(), bad, seconds)};
}

// 8. Rarity weighting finds the rarely reached branch sooner.
Verdict RarityAblation() {
  BuiltProgram built = BuildProgramFromFile(TargetsPath("rarity_trap.mir"));
  const int64_t rare = built.Index("main", "n");
  if (rare < 0) return {false, "block n is not instrumented"};
  auto first_hits = [&](SchedulerVariant variant) {
    std::vector<double> hits;
    for (uint32_t trial = 0; trial < kSuiteTrials; ++trial) {
      CampaignConfig config;
      config.scheduler = variant;
      config.budget = kSuiteBudget;
      config.rng_seed = 1000 + trial;
      CampaignStats stats = RunCampaign(built.program, built.instrumentation, built.dump, {},
                                        config);
      uint64_t hit = stats.first_hit[rare];
      hits.push_back(hit == kNever ? std::numeric_limits<double>::infinity()
                                   : static_cast<double>(hit));
    }
    return hits;
  };
  double rarity = Median(first_hits(SchedulerVariant::kReachableRarity));
  double plain = Median(first_hits(SchedulerVariant::kReachable));
  return {rarity < plain,
          fmt::format("median executions to reach n: reachable_rarity {:.0f}, reachable {:.0f}, "
                      "ratio {:.2f}",
                      rarity, plain, plain / rarity)};
}

// 9. A12 against pair enumeration.
Verdict A12Correctness() {
  auto oracle = [](const std::vector<double> &a, const std::vector<double> &b) {
    double score = 0;
    for (double x : a) {
      for (double y : b) score += x > y ? 1.0 : x == y ? 0.5 : 0.0;
    }
    return score / static_cast<double>(a.size() * b.size());
  };
  Rng rng(9);
  auto sample = [&] {
    std::vector<double> values(1 + rng.Below(30));
    for (double &v : values) v = static_cast<double>(rng.Below(12)) / 4;
    return values;
  };
  int mismatches = 0, identity = 0, antisymmetry = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a = sample(), b = sample();
    mismatches += A12(a, b) != oracle(a, b);
    identity += A12(a, a) != 0.5;
    antisymmetry += std::abs(A12(a, b) + A12(b, a) - 1) > 1e-12;
  }
  return {mismatches + identity + antisymmetry == 0,
          fmt::format("1000 sample pairs: {} oracle mismatches, {} identity and {} antisymmetry "
                      "violations",
                      mismatches, identity, antisymmetry)};
}

// 10. The worked example's abort is found by the full scheduler.
Verdict WorkedExampleCrash() {
  BuiltProgram built = BuildProgramFromFile(TestDataPath("worked_example.mir"));
  CampaignConfig base;
  ApplyConfig(ReadConfigFile(TestDataPath("worked_example.conf")), base);
  constexpr int kTrials = 10;
  int crashed = 0;
  std::string found_at;
  for (int trial = 0; trial < kTrials; ++trial) {
    CampaignConfig config = base;
    config.scheduler = SchedulerVariant::kReachableRarityDepth;
    config.budget = 500'000;
    config.rng_seed = trial;
    CampaignStats stats = RunCampaign(built.program, built.instrumentation, built.dump, {},
                                      config);
    if (stats.crashes.empty()) {
      found_at += fmt::format(" -/{}", stats.covered());
    } else {
      ++crashed;
      found_at += fmt::format(" {}", stats.crashes[0].found_at);
    }
  }
  return {crashed >= 9,
          fmt::format("{}/{} trials crashed within 5e5 executions (per trial: first crash, or "
                      "-/final coverage):{}",
                      crashed, kTrials, found_at)};
}

struct Check {
  const char *name;
  std::function<Verdict()> run;
};

const std::vector<Check> &Checks() {
  static const std::vector<Check> checks = {
      {"worked example reachable blocks", WorkedExampleReach},
      {"rarity example weights and frequencies", RarityExample},
      {"reachability matches oracle", ReachabilityOracle},
      {"instrumentation reconstruction", Reconstruction},
      {"dump round trip and concurrent instrumentation", DumpRoundTripAndConcurrency},
      {"cooldown and mean rule", Cooldown},
      {"full vs random on the target suite", SuiteEffectiveness},
      {"rarity ablation on rarity_trap", RarityAblation},
      {"A12 correctness", A12Correctness},
      {"worked example crash", WorkedExampleCrash},
  };
  return checks;
}

}  // namespace
}  // namespace reachfuzz

int main(int argc, char **argv) {
  using reachfuzz::Checks;
  size_t first = 1, last = Checks().size();
  if (argc > 1) {
    first = last = std::strtoul(argv[1], nullptr, 10);
    if (first < 1 || first > Checks().size()) {
      std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], Checks().size());
      return 2;
    }
  }
  int failed = 0;
  for (size_t n = first; n <= last; ++n) {
    const auto &check = Checks()[n - 1];
    reachfuzz::Verdict verdict;
    try {
      verdict = check.run();
    } catch (const std::exception &e) {
      verdict = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", verdict.pass ? "PASS" : "FAIL", n, check.name,
                verdict.detail.c_str());
    std::fflush(stdout);
    failed += !verdict.pass;
  }
  return failed == 0 ? 0 : 1;
}
