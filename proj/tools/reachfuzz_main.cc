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

// reachfuzz: instrument MiniIR modules, fuzz them, inspect reachability and
// benchmark corpus schedulers.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reachfuzz/campaign.h"
#include "reachfuzz/cfg_index.h"
#include "reachfuzz/cfg_store.h"
#include "reachfuzz/config.h"
#include "reachfuzz/error.h"
#include "reachfuzz/instr_pass.h"
#include "reachfuzz/interpreter.h"
#include "reachfuzz/ir_parser.h"
#include "reachfuzz/report.h"
#include "reachfuzz/target.h"
#include "spdlog/sinks/stdout_color_sinks.h"
#include "spdlog/spdlog.h"

namespace reachfuzz {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

void SetUpLogging() {
  auto logger = spdlog::stderr_color_mt("reachfuzz");
  logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char *level = std::getenv("PRESCIENT_LOG")) {
    auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to off; only honour real names.
    if (parsed != spdlog::level::off || std::string(level) == "off") spdlog::set_level(parsed);
  }
}

std::vector<uint8_t> ReadBytes(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<IrModule> ParseModules(const std::vector<std::string> &paths) {
  std::vector<IrModule> modules;
  for (const std::string &path : paths) modules.push_back(ParseModuleFile(path));
  return modules;
}

// Campaign options shared by fuzz and bench. Flags given on the command
// line override the config file.
struct CampaignFlags {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  // Benchmarks set budget and seed per campaign themselves.
  void Add(CLI::App *cmd, bool single_campaign) {
    cmd->add_option("--config", config_file, "key = value campaign config file")
        ->check(CLI::ExistingFile);
    if (single_campaign) {
      Flag(cmd, "--budget", "budget", "executions after the seeds");
      Flag(cmd, "--seed", "seed", "rng seed");
    }
    Flag(cmd, "--cooldown", "cooldown_multiplier", "rescoring cooldown multiplier");
    Flag(cmd, "--fuel", "fuel", "interpreter steps per execution");
    Flag(cmd, "--stage-iterations", "stage_iterations", "mutations per selection, upper bound");
    Flag(cmd, "--max-len", "max_len", "longest generated input");
    Flag(cmd, "--interesting", "interesting_values", "extra constants, comma-separated");
  }

  void Flag(CLI::App *cmd, const std::string &flag, const std::string &key,
            const std::string &help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string &value) { overrides[key] = value; }, help);
  }

  CampaignConfig Resolve(const std::map<std::string, std::string> &extra = {}) const {
    ConfigMap values;
    if (!config_file.empty()) values = ReadConfigFile(config_file);
    for (const auto &[key, value] : overrides) values[key] = value;
    for (const auto &[key, value] : extra) values[key] = value;
    CampaignConfig config;
    ApplyConfig(values, config);
    return config;
  }
};

struct LoadedProgram {
  CfgDump dump;
  std::vector<IrModule> modules;
  InstrumentedProgram instrumentation;
  Program program;
};

LoadedProgram LoadProgram(const std::vector<std::string> &targets, const fs::path &cfg) {
  LoadedProgram loaded;
  loaded.dump = ReadCfgDump(cfg);
  loaded.modules = ParseModules(targets);
  loaded.instrumentation = InstrumentationFromDump(loaded.dump, loaded.modules);
  loaded.program = Program::Link(loaded.modules);
  return loaded;
}

int RunInstrument(const std::vector<std::string> &inputs, const std::string &cfg_out,
                  const std::string &sidecar, double lock_timeout) {
  LockOptions options;
  options.timeout = std::chrono::milliseconds(static_cast<int64_t>(lock_timeout * 1000));
  std::vector<IrModule> modules = ParseModules(inputs);
  std::vector<ModuleInstrumentation> results;
  for (const IrModule &module : modules) {
    results.push_back(RunPass(module, cfg_out, options));
    spdlog::info("{}: {} blocks from uid {}, {} instrumented", module.name,
                 results.back().coverage_index.size(), results.back().first_uid,
                 std::count_if(results.back().coverage_index.begin(),
                               results.back().coverage_index.end(),
                               [](int64_t i) { return i >= 0; }));
  }
  if (!sidecar.empty()) {
    InstrumentationFromDump(ReadCfgDump(cfg_out), modules).Save(sidecar);
  }
  return kExitOk;
}

int RunFuzz(const std::vector<std::string> &targets, const std::string &cfg,
            const std::string &scheduler, const CampaignFlags &flags,
            const std::string &seeds_dir, const std::string &corpus_dir,
            const std::string &crashes_dir, const std::string &stats_path) {
  std::map<std::string, std::string> extra;
  if (!scheduler.empty()) extra["scheduler"] = scheduler;
  if (!corpus_dir.empty()) extra["corpus_dir"] = corpus_dir;
  if (!crashes_dir.empty()) extra["crashes_dir"] = crashes_dir;
  if (!cfg.empty()) extra["cfg"] = cfg;
  CampaignConfig config = flags.Resolve(extra);
  if (config.cfg_file.empty()) throw ConfigError("no CFG dump given (--cfg or cfg = ...)");
  LoadedProgram loaded = LoadProgram(targets, config.cfg_file);

  std::vector<std::vector<uint8_t>> seeds;
  if (!seeds_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto &item : fs::directory_iterator(seeds_dir)) {
      if (item.is_regular_file()) files.push_back(item.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path &file : files) seeds.push_back(ReadBytes(file));
  }

  std::ofstream file;
  std::ostream *stats = &std::cout;
  if (!stats_path.empty() && stats_path != "-") {
    file.open(stats_path, std::ios::trunc);
    if (!file) throw Error("cannot write " + stats_path);
    stats = &file;
  }
  spdlog::info("fuzzing {} with scheduler {}, budget {}, seed {}", fmt::join(targets, " "),
               SchedulerName(config.scheduler), config.budget, config.rng_seed);
  Fuzzer fuzzer(loaded.program, loaded.instrumentation, loaded.dump, config);
  fuzzer.set_stats_sink(stats);
  const CampaignStats &result = fuzzer.Run(seeds);
  stats->flush();
  spdlog::info("{} executions, {} of {} indices covered, corpus {}, {} crashes, {} timeouts",
               result.executions, result.covered(), loaded.instrumentation.map_size(),
               fuzzer.corpus().size(), result.crashes.size(), result.timeouts);
  return kExitOk;
}

int RunReach(const std::vector<std::string> &targets, const std::string &cfg,
             const std::vector<std::string> &inputs, uint64_t fuel) {
  LoadedProgram loaded = LoadProgram(targets, cfg);
  CfgIndex index(loaded.dump);
  Interpreter interpreter(loaded.program, loaded.instrumentation);
  ExecutionOptions options;
  options.fuel = fuel;
  std::vector<std::vector<uint32_t>> covered;
  std::vector<uint8_t> global(index.map_size(), 0);
  for (const std::string &input : inputs) {
    ExecutionTrace trace = interpreter.Run(ReadBytes(input), options);
    for (uint32_t i : trace.covered_indices) global[i] = 1;
    index.ObserveCoverage(trace.covered_indices);
    covered.push_back(std::move(trace.covered_indices));
  }
  nlohmann::json out = nlohmann::json::array();
  for (size_t i = 0; i < inputs.size(); ++i) {
    nlohmann::json reachable = nlohmann::json::array();
    for (const ReachEntry &e : index.CalcReachableBlocks(covered[i], global)) {
      reachable.push_back({{"uid", e.key.uid}, {"depth", e.depth}, {"indirect", e.key.indirect}});
    }
    out.push_back({{"input", inputs[i]}, {"covered", covered[i]}, {"reachable", reachable}});
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int RunCfgDump(const std::string &path, bool summary) {
  CfgDump dump = ReadCfgDump(path);
  if (!summary) {
    std::cout << CfgDumpToJson(dump).dump(2) << '\n';
    return kExitOk;
  }
  std::cout << fmt::format("format {} uids {} coverage indices {}\n", dump.format_version,
                           dump.latest_block_uid, dump.latest_coverage_map_index);
  for (const ModuleRecord &m : dump.modules) {
    std::cout << fmt::format("module {} checksum {:016x} uids [{}, {}) indices [{}, {})\n",
                             m.name, m.checksum, m.first_uid, m.first_uid + m.num_blocks,
                             m.first_coverage_index, m.first_coverage_index + m.num_instrumented);
  }
  for (const auto &[name, defs] : dump.functions) {
    std::cout << fmt::format("function {} ({} definition{})\n", name, defs.size(),
                             defs.size() == 1 ? "" : "s");
  }
  return kExitOk;
}

std::vector<SchedulerVariant> ParseSchedulerList(const std::string &list) {
  std::vector<SchedulerVariant> result;
  std::stringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    auto variant = ParseSchedulerVariant(name);
    if (!variant) throw ConfigError("unknown scheduler '" + name + "'");
    result.push_back(*variant);
  }
  if (result.empty()) throw ConfigError("no schedulers given");
  return result;
}

std::vector<uint64_t> ParseCheckpoints(const std::vector<std::string> &values) {
  std::vector<uint64_t> result;
  for (const std::string &v : values) result.push_back(ParseCount(v));
  return result;
}

int RunBench(const std::string &suite_dir, const std::string &schedulers, uint32_t trials,
             const std::string &budget, uint64_t base_seed, unsigned threads,
             const CampaignFlags &flags, const std::string &out,
             const std::vector<std::string> &checkpoints) {
  BenchmarkOptions options;
  options.schedulers = ParseSchedulerList(schedulers);
  options.trials = trials;
  options.budget = ParseCount(budget);
  options.base_seed = base_seed;
  options.threads = threads;
  options.base = flags.Resolve();
  std::vector<Target> suite = LoadSuite(suite_dir);
  spdlog::info("benchmarking {} targets x {} schedulers x {} trials, budget {}", suite.size(),
               options.schedulers.size(), trials, options.budget);
  options.progress = [](size_t done, size_t total) {
    spdlog::debug("campaign {}/{} done", done, total);
  };
  TrialMatrix matrix = RunBenchmark(suite, options);
  for (const std::string &failure : matrix.failures) spdlog::warn("failed: {}", failure);
  WriteReport(matrix, out, ParseCheckpoints(checkpoints));
  spdlog::info("results written to {}", out);
  return kExitOk;
}

int RunReport(const std::string &in, std::string out, const std::vector<std::string> &checkpoints) {
  if (out.empty()) out = in;
  TrialMatrix matrix = LoadMatrix(fs::path(in) / "matrix.json");
  WriteReport(matrix, out, ParseCheckpoints(checkpoints));
  spdlog::info("report written to {}", out);
  return kExitOk;
}

int Main(int argc, char **argv) {
  CLI::App app{"reachfuzz: grey-box fuzzing of MiniIR programs with reachability-weighted "
               "corpus scheduling"};
  app.name("reachfuzz");
  app.require_subcommand(1);

  auto *instrument = app.add_subcommand("instrument", "instrument modules into a CFG dump");
  std::vector<std::string> instrument_inputs;
  std::string cfg_out, sidecar;
  double lock_timeout = 30;
  instrument->add_option("modules", instrument_inputs, ".mir files")
      ->required()
      ->check(CLI::ExistingFile);
  instrument->add_option("--cfg-out", cfg_out, "CFG dump to create or extend")->required();
  instrument->add_option("--sidecar", sidecar, "also write the instrumentation table as JSON");
  instrument->add_option("--lock-timeout", lock_timeout, "seconds to wait for the dump lock");

  auto *fuzz = app.add_subcommand("fuzz", "run one fuzzing campaign");
  std::vector<std::string> targets;
  std::string cfg, scheduler, seeds_dir, corpus_dir, crashes_dir, stats_path;
  CampaignFlags fuzz_flags;
  fuzz->add_option("--target", targets, ".mir files, in link order")
      ->required()
      ->check(CLI::ExistingFile);
  fuzz->add_option("--cfg", cfg, "CFG dump the targets were instrumented into");
  fuzz->add_option("--scheduler", scheduler,
                   "prescient, prescient_reachable_rarity, prescient_reachable, "
                   "prescient_direct, random or power");
  fuzz->add_option("--seeds", seeds_dir, "directory of seed inputs")->check(CLI::ExistingDirectory);
  fuzz->add_option("--corpus-dir", corpus_dir, "where to save the final corpus");
  fuzz->add_option("--crashes-dir", crashes_dir, "where to save crashing inputs");
  fuzz->add_option("--stats", stats_path, "stats CSV file (default: stdout)");
  fuzz_flags.Add(fuzz, true);

  auto *reach = app.add_subcommand("reach", "reachable uncovered blocks of inputs");
  std::vector<std::string> reach_targets, reach_inputs;
  std::string reach_cfg;
  uint64_t reach_fuel = 100'000;
  reach->add_option("--target", reach_targets, ".mir files, in link order")
      ->required()
      ->check(CLI::ExistingFile);
  reach->add_option("--cfg", reach_cfg, "CFG dump")->required()->check(CLI::ExistingFile);
  reach->add_option("--input", reach_inputs, "input files; together they form the global coverage")
      ->required()
      ->check(CLI::ExistingFile);
  reach->add_option("--fuel", reach_fuel, "interpreter steps per execution");

  auto *cfg_cmd = app.add_subcommand("cfg", "CFG dump utilities");
  cfg_cmd->require_subcommand(1);
  auto *cfg_dump = cfg_cmd->add_subcommand("dump", "print a CFG dump");
  std::string dump_path;
  bool summary = false;
  cfg_dump->add_option("file", dump_path, "CFG dump")->required()->check(CLI::ExistingFile);
  cfg_dump->add_flag("--summary", summary, "modules and functions only, instead of JSON");

  auto *bench = app.add_subcommand("bench", "run repeated campaigns over a target suite");
  std::string suite_dir, schedulers = "prescient,random,power", budget = "100000", bench_out;
  uint32_t trials = 10;
  uint64_t base_seed = 0;
  unsigned threads = 0;
  std::vector<std::string> bench_checkpoints;
  CampaignFlags bench_flags;
  bench->add_option("--suite", suite_dir, "directory of .mir targets")
      ->required()
      ->check(CLI::ExistingDirectory);
  bench->add_option("--schedulers", schedulers, "comma-separated scheduler names");
  bench->add_option("--trials", trials, "campaigns per target and scheduler");
  bench->add_option("--budget", budget, "executions per campaign");
  bench->add_option("--base-seed", base_seed, "trial t uses seed base + t");
  bench->add_option("--threads", threads, "parallel campaigns (0: all cores)");
  bench->add_option("--out", bench_out, "output directory")->required();
  bench->add_option("--checkpoints", bench_checkpoints, "execution counts for relative.csv")
      ->delimiter(',');
  bench_flags.Add(bench, false);

  auto *report = app.add_subcommand("report", "recompute tables and plots from matrix.json");
  std::string report_in, report_out;
  std::vector<std::string> report_checkpoints;
  report->add_option("--in", report_in, "directory holding matrix.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "output directory (default: --in)");
  report->add_option("--checkpoints", report_checkpoints, "execution counts for relative.csv")
      ->delimiter(',');

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  SetUpLogging();
  try {
    if (*instrument) return RunInstrument(instrument_inputs, cfg_out, sidecar, lock_timeout);
    if (*fuzz) {
      return RunFuzz(targets, cfg, scheduler, fuzz_flags, seeds_dir, corpus_dir, crashes_dir,
                     stats_path);
    }
    if (*reach) return RunReach(reach_targets, reach_cfg, reach_inputs, reach_fuel);
    if (*cfg_dump) return RunCfgDump(dump_path, summary);
    if (*bench) {
      return RunBench(suite_dir, schedulers, trials, budget, base_seed, threads, bench_flags,
                      bench_out, bench_checkpoints);
    }
    if (*report) return RunReport(report_in, report_out, report_checkpoints);
  } catch (const ConfigError &e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace reachfuzz

int main(int argc, char **argv) { return reachfuzz::Main(argc, argv); }
