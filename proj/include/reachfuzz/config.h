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

// Campaign configuration files: one `key = value` per line, `#` starts a
// comment. Keys:
//
//   scheduler            prescient (full), prescient_reachable_rarity,
//                        prescient_reachable, prescient_direct, random, power
//   budget               executions after the seeds; accepts 2e6
//   seed                 rng seed
//   cooldown_multiplier  positive real
//   stage_iterations     mutations per selection, upper bound
//   fuel                 interpreter steps per execution
//   max_call_depth
//   max_len              longest input the mutator produces
//   max_stack            operators stacked per mutation, upper bound
//   interesting_values   comma-separated integers added to the constant
//                        table, decimal or 0x-prefixed, may be negative
//   weight.<operator>    relative frequency of a mutation operator
//   cfg, corpus_dir, crashes_dir   paths

#ifndef REACHFUZZ_CONFIG_H_
#define REACHFUZZ_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "reachfuzz/campaign.h"

namespace reachfuzz {

using ConfigMap = std::map<std::string, std::string, std::less<>>;

// Throws ConfigError on malformed lines and repeated keys.
ConfigMap ParseConfigText(std::string_view text);
ConfigMap ReadConfigFile(const std::filesystem::path &path);

// Overrides the fields named in `values`. Throws ConfigError on unknown
// keys and on values that do not parse or are out of range.
void ApplyConfig(const ConfigMap &values, CampaignConfig &config);

// Every key, such that ApplyConfig(ParseConfigText(FormatConfig(c))) on a
// default config reproduces c.
std::string FormatConfig(const CampaignConfig &config);

// Integer in decimal, 0x hex, or a float spelling of an integer ("2e6").
uint64_t ParseCount(std::string_view text);
int64_t ParseInteger(std::string_view text);

}  // namespace reachfuzz

#endif  // REACHFUZZ_CONFIG_H_
