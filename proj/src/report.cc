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

#include "reachfuzz/report.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "fmt/format.h"
#include "json.hpp"
#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

constexpr const char *kColours[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                    "#66a61e", "#e6ab02", "#a6761d", "#666666"};

nlohmann::json StatsToJson(const CampaignStats &stats) {
  nlohmann::json series = nlohmann::json::array();
  for (const StatsSample &s : stats.series) {
    series.push_back({s.executions, s.covered, s.corpus_size, s.crashes});
  }
  nlohmann::json crashes = nlohmann::json::array();
  for (const CrashRecord &c : stats.crashes) {
    crashes.push_back({{"hash", c.hash}, {"found_at", c.found_at}, {"input", c.input}});
  }
  return {{"executions", stats.executions}, {"timeouts", stats.timeouts},
          {"series", std::move(series)},    {"crashes", std::move(crashes)},
          {"first_hit", stats.first_hit}};
}

CampaignStats StatsFromJson(const nlohmann::json &doc) {
  CampaignStats stats;
  stats.executions = doc.at("executions").get<uint64_t>();
  stats.timeouts = doc.at("timeouts").get<uint64_t>();
  for (const auto &row : doc.at("series")) {
    stats.series.push_back({row.at(0).get<uint64_t>(), row.at(1).get<uint64_t>(),
                            row.at(2).get<uint64_t>(), row.at(3).get<uint64_t>()});
  }
  for (const auto &c : doc.at("crashes")) {
    stats.crashes.push_back({c.at("hash").get<uint64_t>(), c.at("found_at").get<uint64_t>(),
                             c.at("input").get<std::vector<uint8_t>>()});
  }
  stats.first_hit = doc.at("first_hit").get<std::vector<uint64_t>>();
  return stats;
}

}  // namespace

double A12(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("A12 needs two non-empty samples");
  // Rank-sum form of the pair count: sort b once and count by binary search.
  std::vector<double> sorted(b.begin(), b.end());
  std::sort(sorted.begin(), sorted.end());
  double wins = 0;
  for (double x : a) {
    auto lower = std::lower_bound(sorted.begin(), sorted.end(), x);
    auto upper = std::upper_bound(lower, sorted.end(), x);
    wins += static_cast<double>(lower - sorted.begin()) + 0.5 * static_cast<double>(upper - lower);
  }
  return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double Median(std::vector<double> sample) {
  if (sample.empty()) throw ContractViolation("median of an empty sample");
  size_t mid = sample.size() / 2;
  std::nth_element(sample.begin(), sample.begin() + mid, sample.end());
  double upper = sample[mid];
  if (sample.size() % 2 == 1) return upper;
  double lower = *std::max_element(sample.begin(), sample.begin() + mid);
  return (lower + upper) / 2;
}

TrialMatrix RunBenchmark(std::span<const Target> suite, const BenchmarkOptions &options) {
  if (options.schedulers.empty()) throw ContractViolation("no schedulers to benchmark");
  if (options.trials == 0) throw ContractViolation("trials must be positive");
  TrialMatrix matrix;
  for (const Target &target : suite) matrix.targets.push_back(target.name);
  matrix.schedulers = options.schedulers;
  matrix.trials = options.trials;
  matrix.budget = options.budget;
  matrix.base_seed = options.base_seed;
  matrix.cells.assign(suite.size(),
                      std::vector<std::vector<std::optional<CampaignStats>>>(
                          options.schedulers.size(),
                          std::vector<std::optional<CampaignStats>>(options.trials)));

  const size_t per_target = options.schedulers.size() * options.trials;
  const size_t total = suite.size() * per_target;
  std::vector<std::string> errors(total);
  std::atomic<size_t> next{0};
  std::atomic<size_t> done{0};
  auto worker = [&] {
    for (size_t job = next++; job < total; job = next++) {
      const size_t t = job / per_target;
      const size_t s = job % per_target / options.trials;
      const size_t trial = job % options.trials;
      try {
        CampaignConfig config = options.base;
        ApplyConfig(suite[t].settings, config);
        config.scheduler = options.schedulers[s];
        config.budget = options.budget;
        config.rng_seed = options.base_seed + trial;
        config.corpus_dir.clear();
        config.crashes_dir.clear();
        matrix.cells[t][s][trial] = RunCampaign(suite[t].program, suite[t].instrumentation,
                                                suite[t].dump, suite[t].seeds, config);
      } catch (const std::exception &e) {
        errors[job] = fmt::format("{} {} trial {}: {}", suite[t].name,
                                  SchedulerName(options.schedulers[s]), trial, e.what());
      }
      size_t finished = ++done;
      if (options.progress) options.progress(finished, total);
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread &thread : pool) thread.join();
  for (std::string &error : errors) {
    if (!error.empty()) matrix.failures.push_back(std::move(error));
  }
  return matrix;
}

std::vector<double> FinalCoverage(const TrialMatrix &matrix, size_t target, size_t scheduler) {
  std::vector<double> values;
  for (const auto &cell : matrix.cells[target][scheduler]) {
    if (cell) values.push_back(static_cast<double>(cell->covered()));
  }
  return values;
}

uint64_t CoverageGoal(const TrialMatrix &matrix, size_t target, double fraction) {
  double best = 0;
  for (size_t s = 0; s < matrix.schedulers.size(); ++s) {
    for (double covered : FinalCoverage(matrix, target, s)) best = std::max(best, covered);
  }
  return static_cast<uint64_t>(std::ceil(fraction * best));
}

std::vector<double> ExecutionsToGoal(const TrialMatrix &matrix, size_t target, size_t scheduler,
                                     uint64_t goal) {
  std::vector<double> values;
  for (const auto &cell : matrix.cells[target][scheduler]) {
    if (!cell) continue;
    uint64_t executions = cell->ExecutionsToCover(goal);
    values.push_back(executions == kNever ? std::numeric_limits<double>::infinity()
                                          : static_cast<double>(executions));
  }
  return values;
}

double A12ExecutionsToNinety(const TrialMatrix &matrix, size_t target, size_t a, size_t b) {
  uint64_t goal = CoverageGoal(matrix, target, 0.9);
  auto negated = [&](size_t scheduler) {
    std::vector<double> values = ExecutionsToGoal(matrix, target, scheduler, goal);
    for (double &v : values) v = -v;
    return values;
  };
  return A12(negated(a), negated(b));
}

RelativeTable RelativeMedianTable(const TrialMatrix &matrix,
                                  std::span<const uint64_t> checkpoints) {
  RelativeTable table;
  table.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  table.schedulers = matrix.schedulers;
  const size_t num_schedulers = matrix.schedulers.size();
  for (uint64_t checkpoint : checkpoints) {
    std::vector<double> sum(num_schedulers, 0);
    std::vector<int> count(num_schedulers, 0);
    for (size_t t = 0; t < matrix.targets.size(); ++t) {
      std::vector<std::optional<double>> medians(num_schedulers);
      double best = 0;
      for (size_t s = 0; s < num_schedulers; ++s) {
        std::vector<double> sample;
        for (const auto &cell : matrix.cells[t][s]) {
          if (cell) sample.push_back(static_cast<double>(cell->CoveredAt(checkpoint)));
        }
        if (sample.empty()) continue;
        medians[s] = Median(std::move(sample));
        best = std::max(best, *medians[s]);
      }
      for (size_t s = 0; s < num_schedulers; ++s) {
        if (!medians[s]) continue;
        sum[s] += best > 0 ? 100.0 * *medians[s] / best : 100.0;
        ++count[s];
      }
    }
    std::vector<double> row(num_schedulers, 0);
    for (size_t s = 0; s < num_schedulers; ++s) {
      row[s] = count[s] ? sum[s] / count[s] : 0;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void WriteMatrixCsv(const TrialMatrix &matrix, std::ostream &out) {
  out << "target,scheduler,trial,seed,status,executions,covered,corpus_size,crashes,timeouts\n";
  for (size_t t = 0; t < matrix.targets.size(); ++t) {
    for (size_t s = 0; s < matrix.schedulers.size(); ++s) {
      for (uint32_t trial = 0; trial < matrix.trials; ++trial) {
        const auto &cell = matrix.at(t, s, trial);
        out << fmt::format("{},{},{},{},", matrix.targets[t], SchedulerName(matrix.schedulers[s]),
                           trial, matrix.base_seed + trial);
        if (!cell) {
          out << "missing,,,,,\n";
          continue;
        }
        const StatsSample &last = cell->series.back();
        out << fmt::format("ok,{},{},{},{},{}\n", cell->executions, last.covered,
                           last.corpus_size, last.crashes, cell->timeouts);
      }
    }
  }
}

void WriteA12Csv(const TrialMatrix &matrix, std::ostream &out) {
  out << "target,scheduler_a,scheduler_b,a12_final_coverage,a12_executions_to_90\n";
  for (size_t t = 0; t < matrix.targets.size(); ++t) {
    for (size_t a = 0; a < matrix.schedulers.size(); ++a) {
      for (size_t b = 0; b < matrix.schedulers.size(); ++b) {
        if (a == b) continue;
        std::vector<double> x = FinalCoverage(matrix, t, a);
        std::vector<double> y = FinalCoverage(matrix, t, b);
        out << fmt::format("{},{},{},", matrix.targets[t], SchedulerName(matrix.schedulers[a]),
                           SchedulerName(matrix.schedulers[b]));
        if (x.empty() || y.empty()) {
          out << ",\n";
        } else {
          out << fmt::format("{:.4f},{:.4f}\n", A12(x, y), A12ExecutionsToNinety(matrix, t, a, b));
        }
      }
    }
  }
}

void WriteRelativeCsv(const RelativeTable &table, std::ostream &out) {
  out << "checkpoint";
  for (SchedulerVariant s : table.schedulers) out << ',' << SchedulerName(s);
  out << '\n';
  for (size_t c = 0; c < table.checkpoints.size(); ++c) {
    out << table.checkpoints[c];
    for (double v : table.rows[c]) out << fmt::format(",{:.2f}", v);
    out << '\n';
  }
}

std::string CoverageSvg(const TrialMatrix &matrix, size_t target) {
  constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 160, kTop = 30,
                   kBottom = 50;
  constexpr int kPoints = 200;
  uint64_t max_exec = 1;
  double max_cov = 1;
  for (const auto &row : matrix.cells[target]) {
    for (const auto &cell : row) {
      if (!cell) continue;
      max_exec = std::max(max_exec, cell->executions);
      max_cov = std::max(max_cov, static_cast<double>(cell->covered()));
    }
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"18\">{3}: median coverage</text>\n"
      "<line x1=\"{2}\" y1=\"{4}\" x2=\"{5}\" y2=\"{4}\" stroke=\"black\"/>\n"
      "<line x1=\"{2}\" y1=\"{6}\" x2=\"{2}\" y2=\"{4}\" stroke=\"black\"/>\n"
      "<text x=\"{2}\" y=\"{7}\">0</text>\n"
      "<text x=\"{5}\" y=\"{7}\" text-anchor=\"end\">{8} executions</text>\n"
      "<text x=\"{9}\" y=\"{6}\" text-anchor=\"end\">{10}</text>\n"
      "<text x=\"{9}\" y=\"{4}\" text-anchor=\"end\">0</text>\n",
      kWidth, kHeight, kLeft, matrix.targets[target], kTop + plot_h, kLeft + plot_w, kTop,
      kTop + plot_h + 20, max_exec, kLeft - 6, max_cov);
  for (size_t s = 0; s < matrix.schedulers.size(); ++s) {
    std::vector<const CampaignStats *> trials;
    for (const auto &cell : matrix.cells[target][s]) {
      if (cell) trials.push_back(&*cell);
    }
    if (trials.empty()) continue;
    std::string points;
    for (int i = 0; i <= kPoints; ++i) {
      uint64_t at = max_exec * static_cast<uint64_t>(i) / kPoints;
      std::vector<double> sample;
      for (const CampaignStats *stats : trials) {
        sample.push_back(static_cast<double>(stats->CoveredAt(at)));
      }
      double x = kLeft + plot_w * static_cast<double>(at) / static_cast<double>(max_exec);
      double y = kTop + plot_h * (1 - Median(std::move(sample)) / max_cov);
      points += fmt::format("{:.1f},{:.1f} ", x, y);
    }
    const char *colour = kColours[s % std::size(kColours)];
    svg += fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
        colour, points);
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + plot_w + 10,
        kTop + 16 * (static_cast<double>(s) + 1), colour, SchedulerName(matrix.schedulers[s]));
  }
  svg += "</svg>\n";
  return svg;
}

void SaveMatrix(const TrialMatrix &matrix, const std::filesystem::path &path) {
  nlohmann::json doc;
  doc["targets"] = matrix.targets;
  auto &schedulers = doc["schedulers"] = nlohmann::json::array();
  for (SchedulerVariant s : matrix.schedulers) schedulers.push_back(SchedulerName(s));
  doc["trials"] = matrix.trials;
  doc["budget"] = matrix.budget;
  doc["base_seed"] = matrix.base_seed;
  doc["failures"] = matrix.failures;
  auto &cells = doc["cells"] = nlohmann::json::array();
  for (const auto &per_target : matrix.cells) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto &per_scheduler : per_target) {
      nlohmann::json trials = nlohmann::json::array();
      for (const auto &cell : per_scheduler) {
        trials.push_back(cell ? StatsToJson(*cell) : nlohmann::json(nullptr));
      }
      rows.push_back(std::move(trials));
    }
    cells.push_back(std::move(rows));
  }
  std::ofstream out(path, std::ios::trunc);
  out << doc.dump() << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

TrialMatrix LoadMatrix(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    nlohmann::json doc = nlohmann::json::parse(in);
    TrialMatrix matrix;
    matrix.targets = doc.at("targets").get<std::vector<std::string>>();
    for (const auto &name : doc.at("schedulers")) {
      auto variant = ParseSchedulerVariant(name.get<std::string>());
      if (!variant) throw Error("unknown scheduler " + name.dump());
      matrix.schedulers.push_back(*variant);
    }
    matrix.trials = doc.at("trials").get<uint32_t>();
    matrix.budget = doc.at("budget").get<uint64_t>();
    matrix.base_seed = doc.at("base_seed").get<uint64_t>();
    matrix.failures = doc.at("failures").get<std::vector<std::string>>();
    const auto &cells = doc.at("cells");
    if (cells.size() != matrix.targets.size()) throw Error("cell rows do not match targets");
    for (const auto &rows : cells) {
      auto &per_target = matrix.cells.emplace_back();
      if (rows.size() != matrix.schedulers.size()) throw Error("cells do not match schedulers");
      for (const auto &trials : rows) {
        auto &per_scheduler = per_target.emplace_back();
        if (trials.size() != matrix.trials) throw Error("cells do not match trial count");
        for (const auto &cell : trials) {
          if (cell.is_null()) {
            per_scheduler.emplace_back();
          } else {
            per_scheduler.emplace_back(StatsFromJson(cell));
          }
        }
      }
    }
    return matrix;
  } catch (const nlohmann::json::exception &e) {
    throw Error(path.string() + ": malformed matrix: " + e.what());
  }
}

void WriteReport(const TrialMatrix &matrix, const std::filesystem::path &dir,
                 std::vector<uint64_t> checkpoints) {
  std::filesystem::create_directories(dir);
  if (checkpoints.empty()) {
    for (uint64_t percent : {10, 25, 50, 100}) {
      checkpoints.push_back(std::max<uint64_t>(1, matrix.budget * percent / 100));
    }
  }
  auto open = [&dir](const std::string &name) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  SaveMatrix(matrix, dir / "matrix.json");
  {
    auto out = open("matrix.csv");
    WriteMatrixCsv(matrix, out);
  }
  {
    auto out = open("a12.csv");
    WriteA12Csv(matrix, out);
  }
  {
    auto out = open("relative.csv");
    WriteRelativeCsv(RelativeMedianTable(matrix, checkpoints), out);
  }
  for (size_t t = 0; t < matrix.targets.size(); ++t) {
    auto out = open("coverage_" + matrix.targets[t] + ".svg");
    out << CoverageSvg(matrix, t);
  }
}

}  // namespace reachfuzz
