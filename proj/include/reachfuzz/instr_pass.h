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

// Block numbering and coverage instrumentation of MiniIR modules.

#ifndef REACHFUZZ_INSTR_PASS_H_
#define REACHFUZZ_INSTR_PASS_H_

#include <filesystem>
#include <vector>

#include "reachfuzz/cfg_dump.h"
#include "reachfuzz/cfg_store.h"
#include "reachfuzz/instrumented_program.h"
#include "reachfuzz/ir.h"

namespace reachfuzz {

// Which blocks of `fn` receive a coverage-map slot. A block is left
// uninstrumented when its execution can be inferred from another block:
//
//  * it is unreachable from the entry block;
//  * it has a single predecessor whose single successor it is; or
//  * it post-dominates one of its strict dominators (the two always execute
//    together on any path from entry to an exit).
//
// The entry block is always instrumented. Whenever a block is skipped, the
// block it is inferred from executes on exactly the same entry-to-exit paths,
// so the instrumented blocks hit by a path determine all blocks it visits.
std::vector<bool> InstrumentationPlan(const IrFunction &fn);

// InstrumentationPlan(fn)[block], for single queries.
bool NeedsInstrumenting(const IrFunction &fn, size_t block);

// Numbers every block of `module` continuing `dump`'s uid counter, assigns
// consecutive coverage indices to the planned blocks and appends the
// resulting definitions and module record to `dump`. Throws
// ChecksumMismatchError if a module of the same name but different checksum
// is already in the dump, and ContractViolation if this exact module was
// already instrumented into it.
ModuleInstrumentation InstrumentModule(const IrModule &module, CfgDump &dump);

// InstrumentModule() against the dump file at `store`, holding its lock from
// read to write.
ModuleInstrumentation RunPass(const IrModule &module, const std::filesystem::path &store,
                              const LockOptions &options = {});

// Rebuilds the instrumentation of `modules` (in link order) from a dump they
// were all instrumented into. The coverage map spans the whole dump. Throws
// ChecksumMismatchError when a module is missing from the dump or differs
// from the instrumented version.
InstrumentedProgram InstrumentationFromDump(const CfgDump &dump,
                                            const std::vector<IrModule> &modules);

}  // namespace reachfuzz

#endif  // REACHFUZZ_INSTR_PASS_H_
