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

// MiniIR: a small integer-only intermediate representation used as the
// fuzz target language. A module is a list of functions, a function is a
// list of basic blocks, and every block ends in exactly one terminator.
// The text grammar is documented in docs/miniir.md.

#ifndef REACHFUZZ_IR_H_
#define REACHFUZZ_IR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace reachfuzz {

enum class BinOp : uint8_t {
  kAdd,
  kSub,
  kMul,
  kDiv,
  kRem,
  kAnd,
  kOr,
  kXor,
  kShl,
  kShr,  // arithmetic
  kEq,
  kNe,
  kLt,
  kLe,
  kGt,
  kGe,
};

enum class UnOp : uint8_t { kNeg, kNot, kBitNot };

// A variable slot or an immediate.
struct Operand {
  enum class Kind : uint8_t { kSlot, kConst };
  Kind kind = Kind::kConst;
  int64_t value = 0;  // slot index or constant

  static Operand Slot(int64_t slot) { return {Kind::kSlot, slot}; }
  static Operand Const(int64_t value) { return {Kind::kConst, value}; }
  bool is_slot() const { return kind == Kind::kSlot; }
};

struct Instr {
  enum class Kind : uint8_t {
    kMove,          // dst = a
    kUnary,         // dst = un_op a
    kBinary,        // dst = a bin_op b
    kInputByte,     // dst = input_byte(a)
    kInputRead,     // dst = input_read()
    kInputLen,      // dst = input_len()
    kCall,          // [dst =] call callee(args)
    kIndirectCall,  // [dst =] icall a(args)
  };
  Kind kind = Kind::kMove;
  BinOp bin_op = BinOp::kAdd;
  UnOp un_op = UnOp::kNeg;
  int32_t dst = -1;  // -1: result discarded
  Operand a;
  Operand b;
  std::string callee;         // kCall only
  std::vector<Operand> args;  // calls only
  // Filled in by Program::Link: index of the resolved callee in the linked
  // program's function list.
  int32_t callee_id = -1;
  int line = 0;

  bool is_call() const {
    return kind == Kind::kCall || kind == Kind::kIndirectCall;
  }
};

struct Terminator {
  enum class Kind : uint8_t { kGoto, kBranch, kSwitch, kReturn, kAbort };
  Kind kind = Kind::kReturn;
  Operand value;  // branch condition, switch scrutinee or return value
  // kGoto: {target}. kBranch: {if_true, if_false}. kSwitch: one target per
  // case value followed by the default target.
  std::vector<int32_t> targets;
  std::vector<int64_t> case_values;
  int line = 0;

  // Distinct successor block indices in order of first appearance.
  std::vector<int32_t> Successors() const;
};

struct IrBlock {
  std::string label;
  std::vector<Instr> instructions;
  Terminator terminator;
  int line = 0;
};

struct IrFunction {
  std::string name;
  std::vector<std::string> params;
  std::vector<IrBlock> blocks;  // blocks[0] is the entry block
  // Names of all variable slots; the first params.size() are parameters.
  std::vector<std::string> slot_names;
  // Weak definitions lose to non-weak ones at link time.
  bool weak = false;
  int line = 0;

  size_t num_slots() const { return slot_names.size(); }
};

struct IrModule {
  std::string name;
  std::vector<IrFunction> functions;
  // Empty when the module does not declare an entry point.
  std::string entry_function;
  // Function names addressable by `icall`, in table order.
  std::vector<std::string> call_table;
  // FNV-1a hash of the source text.
  uint64_t checksum = 0;

  const IrFunction *FindFunction(const std::string &name) const;
  size_t NumBlocks() const;
};

// 64-bit FNV-1a.
uint64_t Fnv1a64(const void *data, size_t size,
                 uint64_t seed = 0xcbf29ce484222325ULL);

// Combines per-module checksums into one value for a module set.
uint64_t CombineChecksums(const std::vector<uint64_t> &checksums);

}  // namespace reachfuzz

#endif  // REACHFUZZ_IR_H_
