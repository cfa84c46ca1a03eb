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

#ifndef REACHFUZZ_INTERPRETER_H_
#define REACHFUZZ_INTERPRETER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "reachfuzz/instrumented_program.h"
#include "reachfuzz/program.h"

namespace reachfuzz {

struct ExecutionOptions {
  // Maximum number of instructions and terminators executed.
  uint64_t fuel = 1'000'000;
  // Calls nested deeper than this end the run as a timeout.
  uint32_t max_call_depth = 512;
  // Record every block entered (instrumented or not) in ExecutionTrace::path.
  bool record_path = false;
};

struct ExecutionTrace {
  // Coverage-map indices of instrumented blocks entered, sorted, unique.
  std::vector<uint32_t> covered_indices;
  bool crashed = false;
  bool timed_out = false;
  // Set when the program read past the end of its input.
  bool input_exhausted = false;
  // Executed instruction count, the model of execution time.
  uint64_t steps = 0;
  int64_t exit_value = 0;
  // Program-wide block ordinals in execution order; only filled when
  // ExecutionOptions::record_path is set.
  std::vector<uint32_t> path;

  bool operator==(const ExecutionTrace &) const = default;
};

// Runs a linked program against byte-string inputs and reports the
// coverage-map slots of the instrumented blocks it entered. An instance
// keeps scratch buffers between runs and must not be shared across threads;
// independent instances over the same program are fine.
class Interpreter {
 public:
  // Throws ChecksumMismatchError unless `instrumentation` was produced from
  // exactly the modules of `program`, in the same order.
  Interpreter(const Program &program, const InstrumentedProgram &instrumentation);

  ExecutionTrace Run(std::span<const uint8_t> input,
                     const ExecutionOptions &options = {});

 private:
  struct Frame {
    int32_t function;
    int32_t block;
    uint32_t ip;
    uint32_t base;
    int32_t ret_dst;
  };

  const Program &program_;
  const InstrumentedProgram &instrumentation_;
  std::vector<uint8_t> hit_;
  std::vector<int64_t> slots_;
  std::vector<Frame> frames_;
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_INTERPRETER_H_
