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

#include "reachfuzz/program.h"

#include <algorithm>
#include <map>

#include "reachfuzz/error.h"

namespace reachfuzz {

Program Program::Link(std::vector<IrModule> modules) {
  Program program;
  program.modules_ = std::move(modules);
  if (program.modules_.empty()) throw LinkError("no modules to link");

  std::map<std::string, int32_t> chosen;
  uint32_t block = 0;
  for (size_t m = 0; m < program.modules_.size(); ++m) {
    const IrModule &module = program.modules_[m];
    for (size_t f = 0; f < module.functions.size(); ++f) {
      const IrFunction &fn = module.functions[f];
      if (fn.params.size() > kMaxParams) {
        throw LinkError(module.name + ":" + std::to_string(fn.line) + ": '" + fn.name +
                        "' has more than " + std::to_string(kMaxParams) + " parameters");
      }
      int32_t id = static_cast<int32_t>(program.functions_.size());
      program.functions_.push_back({m, f, block});
      block += static_cast<uint32_t>(fn.blocks.size());
      auto [it, inserted] = chosen.emplace(fn.name, id);
      if (!inserted && program.function(it->second).weak && !fn.weak) {
        it->second = id;
      }
    }
  }
  program.num_blocks_ = block;
  program.resolved_.assign(chosen.begin(), chosen.end());

  for (auto &module : program.modules_) {
    for (auto &fn : module.functions) {
      for (auto &blk : fn.blocks) {
        for (auto &instr : blk.instructions) {
          if (instr.kind != Instr::Kind::kCall) continue;
          int32_t callee = program.Resolve(instr.callee);
          if (callee < 0) {
            throw LinkError(module.name + ":" + std::to_string(instr.line) +
                            ": call to undefined function '" + instr.callee + "'");
          }
          if (program.function(callee).params.size() != instr.args.size()) {
            throw LinkError(module.name + ":" + std::to_string(instr.line) + ": '" +
                            instr.callee + "' expects " +
                            std::to_string(program.function(callee).params.size()) +
                            " arguments");
          }
          instr.callee_id = callee;
        }
      }
    }
  }

  for (const IrModule &module : program.modules_) {
    for (const std::string &name : module.call_table) {
      int32_t id = program.Resolve(name);
      if (id < 0) throw LinkError("call table names undefined function '" + name + "'");
      program.call_table_.push_back(id);
    }
    if (program.entry_ < 0 && !module.entry_function.empty()) {
      program.entry_ = program.Resolve(module.entry_function);
    }
  }
  if (program.entry_ < 0) {
    const IrModule &first = program.modules_.front();
    if (first.functions.empty()) throw LinkError("program has no entry function");
    program.entry_ = program.Resolve(first.functions.front().name);
  }
  program.checksum_ = CombineChecksums(program.module_checksums());
  return program;
}

int32_t Program::Resolve(const std::string &name) const {
  auto it = std::lower_bound(
      resolved_.begin(), resolved_.end(), name,
      [](const std::pair<std::string, int32_t> &entry, const std::string &key) {
        return entry.first < key;
      });
  if (it == resolved_.end() || it->first != name) return -1;
  return it->second;
}

std::vector<uint64_t> Program::module_checksums() const {
  std::vector<uint64_t> result;
  result.reserve(modules_.size());
  for (const IrModule &module : modules_) result.push_back(module.checksum);
  return result;
}

}  // namespace reachfuzz
