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

#include "reachfuzz/instr_pass.h"

#include <unordered_map>

#include "reachfuzz/dominators.h"
#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

Digraph BuildCfg(const IrFunction &fn) {
  Digraph cfg(fn.blocks.size());
  for (size_t b = 0; b < fn.blocks.size(); ++b) cfg[b] = fn.blocks[b].terminator.Successors();
  return cfg;
}

}  // namespace

std::vector<bool> InstrumentationPlan(const IrFunction &fn) {
  const Digraph cfg = BuildCfg(fn);
  const auto n = static_cast<int32_t>(cfg.size());
  std::vector<bool> plan(n, false);
  if (n == 0) return plan;
  DominatorAnalysis analysis(cfg, 0);

  std::vector<std::vector<int32_t>> preds(n);
  for (int32_t u = 0; u < n; ++u) {
    if (!analysis.ReachableFromEntry(u)) continue;
    for (int32_t v : cfg[u]) preds[v].push_back(u);
  }

  plan[0] = true;
  for (int32_t b = 1; b < n; ++b) {
    if (!analysis.ReachableFromEntry(b)) continue;
    if (preds[b].size() == 1 && preds[b][0] != b && cfg[preds[b][0]].size() == 1) continue;
    bool inferable = false;
    for (int32_t d = analysis.ImmediateDominator(b); d >= 0; d = analysis.ImmediateDominator(d)) {
      if (analysis.PostDominates(b, d)) {
        inferable = true;
        break;
      }
    }
    plan[b] = !inferable;
  }
  return plan;
}

bool NeedsInstrumenting(const IrFunction &fn, size_t block) {
  return InstrumentationPlan(fn).at(block);
}

ModuleInstrumentation InstrumentModule(const IrModule &module, CfgDump &dump) {
  if (const ModuleRecord *existing = dump.FindModule(module.name)) {
    if (existing->checksum != module.checksum) {
      throw ChecksumMismatchError("module '" + module.name +
                                  "' in the CFG dump was built from different source");
    }
    throw ContractViolation("module '" + module.name + "' is already instrumented");
  }

  ModuleInstrumentation result;
  result.name = module.name;
  result.checksum = module.checksum;
  result.first_uid = dump.latest_block_uid;

  ModuleRecord record;
  record.name = module.name;
  record.checksum = module.checksum;
  record.first_uid = dump.latest_block_uid;
  record.first_coverage_index = dump.latest_coverage_map_index;
  const uint64_t ordinal = dump.modules.size();

  uint64_t uid = dump.latest_block_uid;
  uint64_t index = dump.latest_coverage_map_index;
  for (const IrFunction &fn : module.functions) {
    const std::vector<bool> plan = InstrumentationPlan(fn);
    FunctionDefinition def;
    def.module = ordinal;
    const uint64_t first = uid;
    for (size_t b = 0; b < fn.blocks.size(); ++b) {
      const IrBlock &block = fn.blocks[b];
      BasicBlockInfo info;
      info.uid = uid++;
      if (plan[b]) info.coverage_map_index = index++;
      for (const Instr &instr : block.instructions) {
        if (instr.kind == Instr::Kind::kCall) info.called_funcs.push_back(instr.callee);
        if (instr.kind == Instr::Kind::kIndirectCall) ++info.num_indirect_calls;
      }
      // Every block of the function has its uid by now: first + local index.
      for (int32_t succ : block.terminator.Successors()) info.successor_uids.push_back(first + succ);
      result.coverage_index.push_back(
          info.coverage_map_index ? static_cast<int64_t>(*info.coverage_map_index) : -1);
      def.blocks.push_back(std::move(info));
    }
    dump.functions[fn.name].push_back(std::move(def));
  }

  record.num_blocks = uid - dump.latest_block_uid;
  record.num_instrumented = index - dump.latest_coverage_map_index;
  dump.latest_block_uid = uid;
  dump.latest_coverage_map_index = index;
  dump.modules.push_back(std::move(record));
  return result;
}

ModuleInstrumentation RunPass(const IrModule &module, const std::filesystem::path &store,
                              const LockOptions &options) {
  FetchResult fetched = Fetch(store, options);
  ModuleInstrumentation result = InstrumentModule(module, fetched.dump);
  Update(store, fetched.dump, std::move(fetched.guard));
  return result;
}

InstrumentedProgram InstrumentationFromDump(const CfgDump &dump,
                                            const std::vector<IrModule> &modules) {
  std::unordered_map<uint64_t, int64_t> index_of_uid;
  for (const auto &[name, definitions] : dump.functions) {
    for (const FunctionDefinition &def : definitions) {
      for (const BasicBlockInfo &bb : def.blocks) {
        index_of_uid[bb.uid] =
            bb.coverage_map_index ? static_cast<int64_t>(*bb.coverage_map_index) : -1;
      }
    }
  }
  std::vector<ModuleInstrumentation> result;
  for (const IrModule &module : modules) {
    const ModuleRecord *record = dump.FindModule(module.name);
    if (record == nullptr) {
      throw ChecksumMismatchError("module '" + module.name + "' is not in the CFG dump");
    }
    if (record->checksum != module.checksum || record->num_blocks != module.NumBlocks()) {
      throw ChecksumMismatchError("module '" + module.name +
                                  "' differs from the version in the CFG dump");
    }
    ModuleInstrumentation mi;
    mi.name = module.name;
    mi.checksum = module.checksum;
    mi.first_uid = record->first_uid;
    for (uint64_t uid = record->first_uid; uid < record->first_uid + record->num_blocks; ++uid) {
      auto it = index_of_uid.find(uid);
      if (it == index_of_uid.end()) {
        throw ValidationError("CFG dump has no block with uid " + std::to_string(uid));
      }
      mi.coverage_index.push_back(it->second);
    }
    result.push_back(std::move(mi));
  }
  return InstrumentedProgram(std::move(result), dump.latest_coverage_map_index);
}

}  // namespace reachfuzz
