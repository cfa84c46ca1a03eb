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

#include "reachfuzz/interpreter.h"

#include <algorithm>
#include <array>
#include <limits>

#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

constexpr size_t kMaxArgs = Program::kMaxParams;

int64_t Wrap(uint64_t v) { return static_cast<int64_t>(v); }

int64_t EvalBinary(BinOp op, int64_t a, int64_t b) {
  const auto ua = static_cast<uint64_t>(a);
  const auto ub = static_cast<uint64_t>(b);
  switch (op) {
    case BinOp::kAdd: return Wrap(ua + ub);
    case BinOp::kSub: return Wrap(ua - ub);
    case BinOp::kMul: return Wrap(ua * ub);
    case BinOp::kDiv:
      if (b == 0) return 0;
      if (a == std::numeric_limits<int64_t>::min() && b == -1) return a;
      return a / b;
    case BinOp::kRem:
      if (b == 0 || b == -1) return 0;
      return a % b;
    case BinOp::kAnd: return a & b;
    case BinOp::kOr: return a | b;
    case BinOp::kXor: return a ^ b;
    case BinOp::kShl: return Wrap(ua << (ub & 63));
    case BinOp::kShr: return a >> (ub & 63);
    case BinOp::kEq: return a == b;
    case BinOp::kNe: return a != b;
    case BinOp::kLt: return a < b;
    case BinOp::kLe: return a <= b;
    case BinOp::kGt: return a > b;
    case BinOp::kGe: return a >= b;
  }
  return 0;
}

}  // namespace

Interpreter::Interpreter(const Program &program,
                         const InstrumentedProgram &instrumentation)
    : program_(program), instrumentation_(instrumentation) {
  if (instrumentation.checksum() != program.checksum() ||
      instrumentation.modules().size() != program.modules().size() ||
      instrumentation.block_table().size() != program.num_blocks()) {
    throw ChecksumMismatchError(
        "instrumentation was not produced from this module set");
  }
  hit_.assign(instrumentation.map_size(), 0);
}

ExecutionTrace Interpreter::Run(std::span<const uint8_t> input,
                                const ExecutionOptions &options) {
  ExecutionTrace trace;
  if (options.fuel == 0) {
    trace.timed_out = true;
    return trace;
  }
  const std::vector<int64_t> &table = instrumentation_.block_table();
  const auto &functions = program_.functions();
  size_t cursor = 0;
  frames_.clear();
  slots_.clear();

  auto enter = [&](int32_t fn, int32_t block) {
    uint32_t ordinal = functions[fn].first_block + static_cast<uint32_t>(block);
    if (options.record_path) trace.path.push_back(ordinal);
    int64_t index = table[ordinal];
    if (index >= 0 && !hit_[index]) {
      hit_[index] = 1;
      trace.covered_indices.push_back(static_cast<uint32_t>(index));
    }
  };
  auto push_frame = [&](int32_t fn, int32_t ret_dst, std::span<const int64_t> args) {
    const IrFunction &callee = program_.function(fn);
    uint32_t base = static_cast<uint32_t>(slots_.size());
    slots_.resize(slots_.size() + callee.num_slots(), 0);
    size_t n = std::min(args.size(), callee.params.size());
    std::copy_n(args.begin(), n, slots_.begin() + base);
    frames_.push_back({fn, 0, 0, base, ret_dst});
    enter(fn, 0);
  };

  push_frame(program_.entry_function(), -1, {});
  std::array<int64_t, kMaxArgs> argbuf{};
  bool done = false;
  while (!done) {
    Frame &frame = frames_.back();
    const IrFunction &fn = program_.function(frame.function);
    const IrBlock &block = fn.blocks[frame.block];
    if (trace.steps == options.fuel) {
      trace.timed_out = true;
      break;
    }
    ++trace.steps;
    int64_t *s = slots_.data() + frame.base;
    auto get = [s](const Operand &op) { return op.is_slot() ? s[op.value] : op.value; };

    if (frame.ip < block.instructions.size()) {
      const Instr &in = block.instructions[frame.ip++];
      int64_t value = 0;
      switch (in.kind) {
        case Instr::Kind::kMove:
          value = get(in.a);
          break;
        case Instr::Kind::kUnary: {
          int64_t a = get(in.a);
          value = in.un_op == UnOp::kNeg   ? Wrap(0 - static_cast<uint64_t>(a))
                  : in.un_op == UnOp::kNot ? static_cast<int64_t>(a == 0)
                                           : ~a;
          break;
        }
        case Instr::Kind::kBinary:
          value = EvalBinary(in.bin_op, get(in.a), get(in.b));
          break;
        case Instr::Kind::kInputByte: {
          int64_t k = get(in.a);
          if (k >= 0 && static_cast<uint64_t>(k) < input.size()) {
            value = input[k];
          } else {
            trace.input_exhausted = true;
          }
          break;
        }
        case Instr::Kind::kInputRead:
          if (cursor < input.size()) {
            value = input[cursor++];
          } else {
            trace.input_exhausted = true;
          }
          break;
        case Instr::Kind::kInputLen:
          value = static_cast<int64_t>(input.size());
          break;
        case Instr::Kind::kCall:
        case Instr::Kind::kIndirectCall: {
          int32_t callee = in.callee_id;
          if (in.kind == Instr::Kind::kIndirectCall) {
            int64_t slot = get(in.a);
            const auto &call_table = program_.call_table();
            if (slot < 0 || static_cast<uint64_t>(slot) >= call_table.size()) {
              trace.crashed = true;
              done = true;
              break;
            }
            callee = call_table[slot];
          }
          if (frames_.size() >= options.max_call_depth) {
            trace.timed_out = true;
            done = true;
            break;
          }
          size_t n = std::min(in.args.size(), kMaxArgs);
          for (size_t i = 0; i < n; ++i) argbuf[i] = get(in.args[i]);
          push_frame(callee, in.dst, std::span<const int64_t>(argbuf.data(), n));
          continue;
        }
      }
      if (in.dst >= 0) s[in.dst] = value;
      continue;
    }

    const Terminator &term = block.terminator;
    switch (term.kind) {
      case Terminator::Kind::kGoto:
        frame.block = term.targets[0];
        frame.ip = 0;
        enter(frame.function, frame.block);
        break;
      case Terminator::Kind::kBranch:
        frame.block = get(term.value) != 0 ? term.targets[0] : term.targets[1];
        frame.ip = 0;
        enter(frame.function, frame.block);
        break;
      case Terminator::Kind::kSwitch: {
        int64_t v = get(term.value);
        int32_t target = term.targets.back();
        for (size_t i = 0; i < term.case_values.size(); ++i) {
          if (term.case_values[i] == v) {
            target = term.targets[i];
            break;
          }
        }
        frame.block = target;
        frame.ip = 0;
        enter(frame.function, frame.block);
        break;
      }
      case Terminator::Kind::kReturn: {
        int64_t value = get(term.value);
        int32_t ret_dst = frame.ret_dst;
        slots_.resize(frame.base);
        frames_.pop_back();
        if (frames_.empty()) {
          trace.exit_value = value;
          done = true;
        } else if (ret_dst >= 0) {
          slots_[frames_.back().base + ret_dst] = value;
        }
        break;
      }
      case Terminator::Kind::kAbort:
        trace.crashed = true;
        done = true;
        break;
    }
  }

  for (uint32_t index : trace.covered_indices) hit_[index] = 0;
  std::sort(trace.covered_indices.begin(), trace.covered_indices.end());
  return trace;
}

}  // namespace reachfuzz
