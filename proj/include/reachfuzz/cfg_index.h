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

// In-memory form of a CFG dump tuned for repeated reachability queries.

#ifndef REACHFUZZ_CFG_INDEX_H_
#define REACHFUZZ_CFG_INDEX_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "reachfuzz/cfg_dump.h"

namespace reachfuzz {

// A block that can be reached next. `indirect` marks the stand-in for the
// unknown block an indirect call at block `uid` may lead to.
struct ReachKey {
  uint64_t uid = 0;
  bool indirect = false;

  auto operator<=>(const ReachKey &) const = default;
};

struct ReachEntry {
  ReachKey key;
  uint32_t depth = 0;  // instrumented blocks to pass, >= 1

  auto operator<=>(const ReachEntry &) const = default;
};

using ReachabilityResult = std::vector<ReachEntry>;

// What can be reached from some point without passing an instrumented block:
// the instrumented blocks where such walks stop, and the blocks containing
// indirect calls on the way. Both sorted.
struct ReachSet {
  std::vector<uint64_t> blocks;
  std::vector<uint64_t> indirect_sites;

  bool operator==(const ReachSet &) const = default;
};

class CfgIndex {
 public:
  // Validates the dump (ValidationError on dangling successors and the like)
  // and precomputes all caches. Calls to names without any definition in the
  // dump are recorded in unresolved_calls() and otherwise ignored.
  explicit CfgIndex(CfgDump dump);

  const CfgDump &dump() const { return dump_; }
  uint64_t map_size() const { return uid_of_index_.size(); }
  uint64_t num_uids() const { return blocks_.size(); }

  // Uid of the block owning coverage index `index`; InconsistentBuildError
  // if no block does.
  uint64_t UidOfIndex(uint64_t index) const;
  // Coverage index of `uid`, or -1 for uninstrumented blocks.
  int64_t IndexOfUid(uint64_t uid) const { return blocks_.at(uid).coverage_index; }
  const BasicBlockInfo &Block(uint64_t uid) const;

  // Cache of everything reachable from the entry of the active definition of
  // `function`. Throws std::out_of_range for unknown names.
  const ReachSet &FunctionEntryReachable(const std::string &function) const;
  // Cache of everything reachable from instrumented block `uid` through
  // its successors and the functions it calls.
  const ReachSet &InstrumentedSuccessors(uint64_t uid) const;

  // Index (into dump().functions[name]) of the definition currently assumed
  // to be the one linked in.
  size_t ActiveDefinition(const std::string &function) const;
  // Makes the definition owning any block in `observed` (coverage indices)
  // active for `function`, and rebuilds the caches depending on it. Returns
  // whether the active definition changed.
  bool ResolveDefinition(const std::string &function, std::span<const uint32_t> observed);
  // ResolveDefinition() for every function touched by `observed`. Returns
  // the promoted function names.
  std::vector<std::string> ObserveCoverage(std::span<const uint32_t> observed);

  const std::vector<std::string> &unresolved_calls() const { return unresolved_calls_; }

  // Uncovered blocks reachable from the blocks of `per_input` (coverage
  // indices) without passing blocks covered in `global` (a hit flag per
  // coverage index; missing tail entries count as uncovered). Breadth-first
  // over the instrumented-successor caches, so depths are minimal. Every
  // indirect call site met contributes a pseudo block one level deeper. If
  // `work` is non-null it receives the number of cache elements examined.
  ReachabilityResult CalcReachableBlocks(std::span<const uint32_t> per_input,
                                         std::span<const uint8_t> global,
                                         size_t *work = nullptr) const;

 private:
  struct BlockRecord {
    const BasicBlockInfo *info = nullptr;
    int64_t coverage_index = -1;
    uint32_t function = 0;
    uint32_t definition = 0;
  };
  struct FunctionRecord {
    std::string name;
    std::vector<const FunctionDefinition *> definitions;
    uint32_t active = 0;
    ReachSet entry_cache;
    std::vector<uint32_t> entry_deps;  // functions whose choice the cache used
  };

  int64_t FunctionId(const std::string &name) const;
  // Walks uninstrumented blocks from `start` (entering callees at their
  // active entry); collects where the walk stops. `deps` receives the
  // functions whose active definition was consulted.
  ReachSet Walk(std::vector<uint64_t> start, std::vector<uint32_t> &deps) const;
  void ComputeEntryCache(uint32_t function);
  void ComputeSuccessorCache(uint64_t uid);
  void RebuildDependents(uint32_t function);

  CfgDump dump_;
  std::vector<BlockRecord> blocks_;  // by uid
  std::vector<uint64_t> uid_of_index_;
  std::vector<FunctionRecord> functions_;
  std::vector<bool> entry_ready_;
  std::unordered_map<std::string, uint32_t> function_ids_;
  std::vector<std::vector<uint32_t>> callees_;  // resolved direct calls per uid
  std::vector<ReachSet> successor_cache_;        // by uid, instrumented only
  std::vector<std::vector<uint32_t>> successor_deps_;
  std::vector<std::string> unresolved_calls_;
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_CFG_INDEX_H_
