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

// The CFG dump: everything the fuzzer needs to know about the instrumented
// program's control flow graph, accumulated across instrumentation runs.
//
// Binary layout (all integers little-endian, u64 unless noted):
//
//   magic            8 bytes  "PFCFG\0\0\1"
//   format_version
//   latest_coverage_map_index
//   latest_block_uid
//   module count, then per module:
//     name (str) checksum first_uid num_blocks first_coverage_index
//     num_instrumented
//   function count, then per function (ascending by name):
//     name (str) definition count, then per definition:
//       module ordinal, block count, then per block:
//         uid
//         coverage_map_index  (i64, -1 = not instrumented)
//         called function count, then names (str)
//         successor count, then uids
//         num_indirect_calls
//
// where str = u32 byte length followed by UTF-8 bytes.

#ifndef REACHFUZZ_CFG_DUMP_H_
#define REACHFUZZ_CFG_DUMP_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace reachfuzz {

inline constexpr char kCfgMagic[8] = {'P', 'F', 'C', 'F', 'G', '\0', '\0', '\1'};
inline constexpr uint64_t kCfgFormatVersion = 1;

struct BasicBlockInfo {
  uint64_t uid = 0;
  // Absent for blocks whose coverage is inferred rather than reported.
  std::optional<uint64_t> coverage_map_index;
  std::vector<std::string> called_funcs;
  std::vector<uint64_t> successor_uids;
  uint64_t num_indirect_calls = 0;

  bool operator==(const BasicBlockInfo &) const = default;
};

struct FunctionDefinition {
  uint64_t module = 0;  // ordinal into CfgDump::modules
  std::vector<BasicBlockInfo> blocks;  // blocks[0] is the entry block

  bool operator==(const FunctionDefinition &) const = default;
};

struct ModuleRecord {
  std::string name;
  uint64_t checksum = 0;
  uint64_t first_uid = 0;
  uint64_t num_blocks = 0;
  uint64_t first_coverage_index = 0;
  uint64_t num_instrumented = 0;

  bool operator==(const ModuleRecord &) const = default;
};

struct CfgDump {
  uint64_t format_version = kCfgFormatVersion;
  uint64_t latest_coverage_map_index = 0;
  uint64_t latest_block_uid = 0;
  std::vector<ModuleRecord> modules;
  // A name maps to several definitions when more than one module defines
  // it; the fuzzer decides at runtime which one is live.
  std::map<std::string, std::vector<FunctionDefinition>> functions;

  bool operator==(const CfgDump &) const = default;

  const ModuleRecord *FindModule(const std::string &name) const;
};

std::vector<uint8_t> SerializeCfgDump(const CfgDump &dump);

// Throws CfgFormatError naming the byte offset of the first problem: bad
// magic, unknown version, truncation or trailing bytes.
CfgDump DeserializeCfgDump(std::span<const uint8_t> bytes);

// Checks the structural invariants: distinct uids below latest_block_uid,
// consecutive uids within a definition, distinct coverage indices below
// latest_coverage_map_index, successors inside the same definition, module
// ordinals in range. Throws ValidationError.
void ValidateCfgDump(const CfgDump &dump);

nlohmann::json CfgDumpToJson(const CfgDump &dump);

}  // namespace reachfuzz

#endif  // REACHFUZZ_CFG_DUMP_H_
