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

#ifndef REACHFUZZ_PROGRAM_H_
#define REACHFUZZ_PROGRAM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "reachfuzz/ir.h"

namespace reachfuzz {

// A set of modules linked together. Every function of every module keeps
// its place in the linked function list (module order, then function
// order), and every block gets a program-wide ordinal in the same order, so
// block ordinals line up with the uids the instrumentation pass assigns when
// the modules are instrumented in the same order.
//
// Direct calls resolve by name. A non-weak definition wins over a weak one;
// among equals the earliest module wins.
class Program {
 public:
  static constexpr size_t kMaxParams = 16;

  struct FunctionRef {
    size_t module = 0;
    size_t function = 0;
    uint32_t first_block = 0;  // program-wide ordinal of the entry block
  };

  // Throws LinkError on unresolved calls, arity mismatches, unknown table
  // entries or a missing entry point. The entry point is the first declared
  // `entry` directive, falling back to the first function of the first
  // module.
  static Program Link(std::vector<IrModule> modules);

  const std::vector<IrModule> &modules() const { return modules_; }
  const std::vector<FunctionRef> &functions() const { return functions_; }
  const IrFunction &function(size_t id) const {
    const FunctionRef &ref = functions_[id];
    return modules_[ref.module].functions[ref.function];
  }
  // Resolved definition for `name`, or -1.
  int32_t Resolve(const std::string &name) const;
  int32_t entry_function() const { return entry_; }
  // Function ids addressable by icall, in table order.
  const std::vector<int32_t> &call_table() const { return call_table_; }
  uint32_t num_blocks() const { return num_blocks_; }
  // Checksum of the module set, see CombineChecksums().
  uint64_t checksum() const { return checksum_; }
  std::vector<uint64_t> module_checksums() const;

 private:
  std::vector<IrModule> modules_;
  std::vector<FunctionRef> functions_;
  std::vector<std::pair<std::string, int32_t>> resolved_;  // sorted by name
  std::vector<int32_t> call_table_;
  int32_t entry_ = -1;
  uint32_t num_blocks_ = 0;
  uint64_t checksum_ = 0;
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_PROGRAM_H_
