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

#include "reachfuzz/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fmt/format.h"
#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

std::string_view Trim(std::string_view s) {
  const char *ws = " \t\r";
  size_t first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

double ParseReal(std::string_view text) {
  std::string copy(text);
  char *end = nullptr;
  double value = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(value)) {
    throw ConfigError("not a number: '" + copy + "'");
  }
  return value;
}

template <typename T>
T Positive(std::string_view key, uint64_t value) {
  if (value == 0 || value > std::numeric_limits<T>::max()) {
    throw ConfigError(fmt::format("{} out of range: {}", key, value));
  }
  return static_cast<T>(value);
}

}  // namespace

uint64_t ParseCount(std::string_view text) {
  text = Trim(text);
  uint64_t value = 0;
  int base = 10;
  std::string_view digits = text;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    base = 16;
    digits.remove_prefix(2);
  }
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
  if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) return value;
  if (base == 10 && ec != std::errc::result_out_of_range) {
    double real = ParseReal(text);
    if (real >= 0 && real < 0x1p64 && std::floor(real) == real) return static_cast<uint64_t>(real);
  }
  throw ConfigError("not a non-negative integer: '" + std::string(text) + "'");
}

int64_t ParseInteger(std::string_view text) {
  text = Trim(text);
  const bool negative = text.starts_with('-');
  uint64_t magnitude = ParseCount(negative ? text.substr(1) : text);
  if (negative) {
    if (magnitude > uint64_t{1} << 63) throw ConfigError("integer too small: " + std::string(text));
    return static_cast<int64_t>(0 - magnitude);
  }
  // Unsigned 64-bit patterns such as 0xFFFFFFFFFFFFFFFF wrap to negatives.
  return static_cast<int64_t>(magnitude);
}

ConfigMap ParseConfigText(std::string_view text) {
  ConfigMap values;
  int line_number = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view = line;
    view = Trim(view.substr(0, view.find('#')));
    if (view.empty()) continue;
    size_t eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected key = value", line_number));
    }
    std::string key(Trim(view.substr(0, eq)));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_number));
    if (!values.emplace(key, Trim(view.substr(eq + 1))).second) {
      throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_number, key));
    }
  }
  return values;
}

ConfigMap ReadConfigFile(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseConfigText(buffer.str());
  } catch (const ConfigError &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ApplyConfig(const ConfigMap &values, CampaignConfig &config) {
  for (const auto &[key, value] : values) {
    try {
      if (key == "scheduler") {
        auto variant = ParseSchedulerVariant(value);
        if (!variant) throw ConfigError("unknown scheduler '" + value + "'");
        config.scheduler = *variant;
      } else if (key == "budget") {
        config.budget = ParseCount(value);
      } else if (key == "seed") {
        config.rng_seed = ParseCount(value);
      } else if (key == "cooldown_multiplier") {
        double m = ParseReal(value);
        if (!(m > 0)) throw ConfigError("must be positive");
        config.cooldown_multiplier = m;
      } else if (key == "stage_iterations") {
        config.stage_iterations = Positive<uint32_t>(key, ParseCount(value));
      } else if (key == "fuel") {
        config.execution.fuel = Positive<uint64_t>(key, ParseCount(value));
      } else if (key == "max_call_depth") {
        config.execution.max_call_depth = Positive<uint32_t>(key, ParseCount(value));
      } else if (key == "max_len") {
        config.mutator.max_len = Positive<size_t>(key, ParseCount(value));
      } else if (key == "max_stack") {
        config.mutator.max_stack = Positive<uint32_t>(key, ParseCount(value));
      } else if (key == "interesting_values") {
        config.mutator.extra_values.clear();
        std::string_view rest = value;
        while (!Trim(rest).empty()) {
          size_t comma = rest.find(',');
          config.mutator.extra_values.push_back(ParseInteger(rest.substr(0, comma)));
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
      } else if (key.starts_with("weight.")) {
        auto op = ParseMutationOp(std::string_view(key).substr(7));
        if (!op) throw ConfigError("unknown mutation operator");
        double w = ParseReal(value);
        if (!(w >= 0)) throw ConfigError("must be non-negative");
        config.mutator.weights[static_cast<size_t>(*op)] = w;
      } else if (key == "cfg") {
        config.cfg_file = value;
      } else if (key == "corpus_dir") {
        config.corpus_dir = value;
      } else if (key == "crashes_dir") {
        config.crashes_dir = value;
      } else {
        throw ConfigError("unknown key");
      }
    } catch (const Error &e) {
      throw ConfigError(fmt::format("{} = {}: {}", key, value, e.what()));
    }
  }
  try {
    ValidateConfig(config);
  } catch (const ContractViolation &e) {
    throw ConfigError(e.what());
  }
}

std::string FormatConfig(const CampaignConfig &config) {
  std::string out;
  auto line = [&out](std::string_view key, const auto &value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("scheduler", SchedulerName(config.scheduler));
  line("budget", config.budget);
  line("seed", config.rng_seed);
  line("cooldown_multiplier", config.cooldown_multiplier);
  line("stage_iterations", config.stage_iterations);
  line("fuel", config.execution.fuel);
  line("max_call_depth", config.execution.max_call_depth);
  line("max_len", config.mutator.max_len);
  line("max_stack", config.mutator.max_stack);
  std::string extras;
  for (int64_t v : config.mutator.extra_values) {
    extras += (extras.empty() ? "" : ",") + std::to_string(v);
  }
  line("interesting_values", extras);
  for (size_t i = 0; i < kNumMutationOps; ++i) {
    line(fmt::format("weight.{}", MutationOpName(static_cast<MutationOp>(i))),
         config.mutator.weights[i]);
  }
  line("cfg", config.cfg_file.string());
  line("corpus_dir", config.corpus_dir.string());
  line("crashes_dir", config.crashes_dir.string());
  return out;
}

}  // namespace reachfuzz
