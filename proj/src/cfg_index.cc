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

#include "reachfuzz/cfg_index.h"

#include <algorithm>
#include <deque>

#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

void SortUnique(std::vector<uint64_t> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void SortUnique(std::vector<uint32_t> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool Contains(const std::vector<uint32_t> &sorted, uint32_t value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

// Generation-stamped visited marks, reused across queries on one thread.
struct Scratch {
  std::vector<uint32_t> block_stamp;
  std::vector<uint32_t> site_stamp;
  uint32_t generation = 0;

  void Begin(size_t n) {
    if (block_stamp.size() < n) {
      block_stamp.assign(n, 0);
      site_stamp.assign(n, 0);
      generation = 0;
    }
    if (++generation == 0) {
      std::fill(block_stamp.begin(), block_stamp.end(), 0);
      std::fill(site_stamp.begin(), site_stamp.end(), 0);
      generation = 1;
    }
  }
};

}  // namespace

CfgIndex::CfgIndex(CfgDump dump) : dump_(std::move(dump)) {
  ValidateCfgDump(dump_);
  blocks_.resize(dump_.latest_block_uid);
  uid_of_index_.assign(dump_.latest_coverage_map_index, UINT64_MAX);
  for (const auto &[name, definitions] : dump_.functions) {
    auto id = static_cast<uint32_t>(functions_.size());
    function_ids_.emplace(name, id);
    FunctionRecord record;
    record.name = name;
    for (size_t d = 0; d < definitions.size(); ++d) {
      record.definitions.push_back(&definitions[d]);
      for (const BasicBlockInfo &bb : definitions[d].blocks) {
        BlockRecord &block = blocks_[bb.uid];
        block.info = &bb;
        block.function = id;
        block.definition = static_cast<uint32_t>(d);
        if (bb.coverage_map_index) {
          block.coverage_index = static_cast<int64_t>(*bb.coverage_map_index);
          uid_of_index_[*bb.coverage_map_index] = bb.uid;
        }
      }
    }
    functions_.push_back(std::move(record));
  }

  callees_.resize(blocks_.size());
  for (const BlockRecord &block : blocks_) {
    if (block.info == nullptr) continue;
    for (const std::string &callee : block.info->called_funcs) {
      int64_t id = FunctionId(callee);
      if (id < 0) {
        unresolved_calls_.push_back(callee);
        continue;
      }
      callees_[block.info->uid].push_back(static_cast<uint32_t>(id));
    }
    SortUnique(callees_[block.info->uid]);
  }
  std::sort(unresolved_calls_.begin(), unresolved_calls_.end());
  unresolved_calls_.erase(std::unique(unresolved_calls_.begin(), unresolved_calls_.end()),
                          unresolved_calls_.end());

  entry_ready_.assign(functions_.size(), false);
  for (uint32_t f = 0; f < functions_.size(); ++f) ComputeEntryCache(f);
  successor_cache_.resize(blocks_.size());
  successor_deps_.resize(blocks_.size());
  for (const BlockRecord &block : blocks_) {
    if (block.info != nullptr && block.coverage_index >= 0) ComputeSuccessorCache(block.info->uid);
  }
}

int64_t CfgIndex::FunctionId(const std::string &name) const {
  auto it = function_ids_.find(name);
  return it == function_ids_.end() ? -1 : static_cast<int64_t>(it->second);
}

uint64_t CfgIndex::UidOfIndex(uint64_t index) const {
  if (index >= uid_of_index_.size() || uid_of_index_[index] == UINT64_MAX) {
    throw InconsistentBuildError("coverage index " + std::to_string(index) +
                                 " does not belong to any block of the CFG dump");
  }
  return uid_of_index_[index];
}

const BasicBlockInfo &CfgIndex::Block(uint64_t uid) const {
  const BasicBlockInfo *info = blocks_.at(uid).info;
  if (info == nullptr) throw std::out_of_range("no block with uid " + std::to_string(uid));
  return *info;
}

const ReachSet &CfgIndex::FunctionEntryReachable(const std::string &function) const {
  return functions_.at(function_ids_.at(function)).entry_cache;
}

const ReachSet &CfgIndex::InstrumentedSuccessors(uint64_t uid) const {
  if (blocks_.at(uid).coverage_index < 0) {
    throw std::out_of_range("block " + std::to_string(uid) + " is not instrumented");
  }
  return successor_cache_[uid];
}

size_t CfgIndex::ActiveDefinition(const std::string &function) const {
  return functions_.at(function_ids_.at(function)).active;
}

ReachSet CfgIndex::Walk(std::vector<uint64_t> start, std::vector<uint32_t> &deps) const {
  ReachSet result;
  std::vector<uint8_t> seen(blocks_.size(), 0);
  std::vector<uint64_t> stack = std::move(start);
  auto enter_callee = [&](uint32_t callee) {
    const FunctionRecord &fn = functions_[callee];
    deps.push_back(callee);
    if (entry_ready_[callee]) {
      result.blocks.insert(result.blocks.end(), fn.entry_cache.blocks.begin(),
                           fn.entry_cache.blocks.end());
      result.indirect_sites.insert(result.indirect_sites.end(),
                                   fn.entry_cache.indirect_sites.begin(),
                                   fn.entry_cache.indirect_sites.end());
      deps.insert(deps.end(), fn.entry_deps.begin(), fn.entry_deps.end());
    } else {
      stack.push_back(fn.definitions[fn.active]->blocks.front().uid);
    }
  };
  while (!stack.empty()) {
    uint64_t uid = stack.back();
    stack.pop_back();
    if (seen[uid]) continue;
    seen[uid] = 1;
    const BlockRecord &block = blocks_[uid];
    if (block.coverage_index >= 0) {
      result.blocks.push_back(uid);
      continue;
    }
    if (block.info->num_indirect_calls > 0) result.indirect_sites.push_back(uid);
    for (uint32_t callee : callees_[uid]) enter_callee(callee);
    for (uint64_t succ : block.info->successor_uids) stack.push_back(succ);
  }
  SortUnique(result.blocks);
  SortUnique(result.indirect_sites);
  SortUnique(deps);
  return result;
}

void CfgIndex::ComputeEntryCache(uint32_t function) {
  FunctionRecord &fn = functions_[function];
  std::vector<uint32_t> deps{function};
  ReachSet cache = Walk({fn.definitions[fn.active]->blocks.front().uid}, deps);
  fn.entry_cache = std::move(cache);
  fn.entry_deps = std::move(deps);
  entry_ready_[function] = true;
}

void CfgIndex::ComputeSuccessorCache(uint64_t uid) {
  const BlockRecord &block = blocks_[uid];
  std::vector<uint32_t> deps;
  std::vector<uint64_t> start(block.info->successor_uids.begin(),
                              block.info->successor_uids.end());
  std::vector<uint64_t> callee_entries;
  ReachSet cache;
  {
    // Calls made by the block itself: their entry caches are exact.
    std::vector<uint32_t> callee_deps;
    for (uint32_t callee : callees_[uid]) {
      const FunctionRecord &fn = functions_[callee];
      if (entry_ready_[callee]) {
        cache.blocks.insert(cache.blocks.end(), fn.entry_cache.blocks.begin(),
                            fn.entry_cache.blocks.end());
        cache.indirect_sites.insert(cache.indirect_sites.end(),
                                    fn.entry_cache.indirect_sites.begin(),
                                    fn.entry_cache.indirect_sites.end());
        deps.insert(deps.end(), fn.entry_deps.begin(), fn.entry_deps.end());
      } else {
        start.push_back(fn.definitions[fn.active]->blocks.front().uid);
      }
      deps.push_back(callee);
    }
  }
  ReachSet walked = Walk(std::move(start), deps);
  cache.blocks.insert(cache.blocks.end(), walked.blocks.begin(), walked.blocks.end());
  cache.indirect_sites.insert(cache.indirect_sites.end(), walked.indirect_sites.begin(),
                              walked.indirect_sites.end());
  if (block.info->num_indirect_calls > 0) cache.indirect_sites.push_back(uid);
  SortUnique(cache.blocks);
  SortUnique(cache.indirect_sites);
  SortUnique(deps);
  successor_cache_[uid] = std::move(cache);
  successor_deps_[uid] = std::move(deps);
}

void CfgIndex::RebuildDependents(uint32_t function) {
  std::vector<uint32_t> stale;
  for (uint32_t f = 0; f < functions_.size(); ++f) {
    if (Contains(functions_[f].entry_deps, function)) {
      stale.push_back(f);
      entry_ready_[f] = false;
    }
  }
  for (uint32_t f : stale) ComputeEntryCache(f);
  for (uint64_t uid = 0; uid < blocks_.size(); ++uid) {
    if (blocks_[uid].coverage_index >= 0 && Contains(successor_deps_[uid], function)) {
      ComputeSuccessorCache(uid);
    }
  }
}

bool CfgIndex::ResolveDefinition(const std::string &function,
                                 std::span<const uint32_t> observed) {
  int64_t id = FunctionId(function);
  if (id < 0) return false;
  FunctionRecord &fn = functions_[id];
  for (uint32_t index : observed) {
    const BlockRecord &block = blocks_[UidOfIndex(index)];
    if (block.function != id) continue;
    if (block.definition == fn.active) return false;
    fn.active = block.definition;
    RebuildDependents(static_cast<uint32_t>(id));
    return true;
  }
  return false;
}

std::vector<std::string> CfgIndex::ObserveCoverage(std::span<const uint32_t> observed) {
  std::vector<std::string> promoted;
  for (uint32_t index : observed) {
    const BlockRecord &block = blocks_[UidOfIndex(index)];
    FunctionRecord &fn = functions_[block.function];
    if (fn.definitions.size() < 2 || block.definition == fn.active) continue;
    if (ResolveDefinition(fn.name, observed)) promoted.push_back(fn.name);
  }
  return promoted;
}

ReachabilityResult CfgIndex::CalcReachableBlocks(std::span<const uint32_t> per_input,
                                                 std::span<const uint8_t> global,
                                                 size_t *work) const {
  thread_local Scratch scratch;
  scratch.Begin(blocks_.size());
  const uint32_t gen = scratch.generation;
  auto covered = [&](uint64_t uid) {
    auto index = static_cast<uint64_t>(blocks_[uid].coverage_index);
    return index < global.size() && global[index] != 0;
  };

  ReachabilityResult result;
  std::deque<std::pair<uint64_t, uint32_t>> queue;
  for (uint32_t index : per_input) {
    uint64_t uid = UidOfIndex(index);
    if (scratch.block_stamp[uid] == gen) continue;
    scratch.block_stamp[uid] = gen;
    queue.emplace_back(uid, 0);
  }
  size_t examined = 0;
  while (!queue.empty()) {
    auto [uid, depth] = queue.front();
    queue.pop_front();
    const ReachSet &next = successor_cache_[uid];
    examined += 1 + next.blocks.size() + next.indirect_sites.size();
    for (uint64_t succ : next.blocks) {
      if (scratch.block_stamp[succ] == gen || covered(succ)) continue;
      scratch.block_stamp[succ] = gen;
      result.push_back({{succ, false}, depth + 1});
      queue.emplace_back(succ, depth + 1);
    }
    for (uint64_t site : next.indirect_sites) {
      if (scratch.site_stamp[site] == gen) continue;
      scratch.site_stamp[site] = gen;
      result.push_back({{site, true}, depth + 1});
    }
  }
  if (work != nullptr) *work = examined;
  return result;
}

}  // namespace reachfuzz
