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

#ifndef REACHFUZZ_INSTRUMENTED_PROGRAM_H_
#define REACHFUZZ_INSTRUMENTED_PROGRAM_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reachfuzz {

// Instrumentation of one module as produced by one pass invocation.
struct ModuleInstrumentation {
  std::string name;
  uint64_t checksum = 0;
  uint64_t first_uid = 0;
  // Coverage-map index per block in module order (functions, then blocks);
  // -1 for blocks that were not instrumented.
  std::vector<int64_t> coverage_index;

  bool operator==(const ModuleInstrumentation &) const = default;
};

// The per-block instrumentation table of a linked program: which coverage
// map slot, if any, the interpreter reports when a block is entered.
class InstrumentedProgram {
 public:
  InstrumentedProgram() = default;
  // `map_size` must exceed every coverage index in `modules`.
  InstrumentedProgram(std::vector<ModuleInstrumentation> modules,
                      uint64_t map_size);

  const std::vector<ModuleInstrumentation> &modules() const {
    return modules_;
  }
  uint64_t map_size() const { return map_size_; }
  // CombineChecksums() over the module checksums, in order.
  uint64_t checksum() const { return checksum_; }
  // Coverage index per program-wide block ordinal (-1: uninstrumented).
  const std::vector<int64_t> &block_table() const { return block_table_; }
  size_t NumInstrumented() const;

  // JSON sidecar written next to the CFG dump by `instrument`.
  void Save(const std::filesystem::path &path) const;
  static InstrumentedProgram Load(const std::filesystem::path &path);

  bool operator==(const InstrumentedProgram &other) const {
    return modules_ == other.modules_ && map_size_ == other.map_size_;
  }

 private:
  std::vector<ModuleInstrumentation> modules_;
  uint64_t map_size_ = 0;
  uint64_t checksum_ = 0;
  std::vector<int64_t> block_table_;
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_INSTRUMENTED_PROGRAM_H_
