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

// Havoc-style byte-string mutations.

#ifndef REACHFUZZ_MUTATOR_H_
#define REACHFUZZ_MUTATOR_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "reachfuzz/corpus.h"
#include "reachfuzz/rng.h"

namespace reachfuzz {

enum class MutationOp : uint8_t {
  kBitFlip,
  kByteFlip,
  kRandomByte,
  kArithmetic,        // add or subtract 1..35 on one byte
  kInterestingValue,  // overwrite with or insert a table constant
  kDeleteBlock,
  kDuplicateBlock,
  kSplice,            // head of this input, tail of a corpus entry
};
inline constexpr size_t kNumMutationOps = 8;

std::string_view MutationOpName(MutationOp op);
std::optional<MutationOp> ParseMutationOp(std::string_view name);

struct InterestingValue {
  int64_t value;
  // Smallest of 1, 2, 4, 8 bytes that holds the value as a signed or an
  // unsigned integer.
  uint8_t width;

  bool operator==(const InterestingValue &) const = default;
};

uint8_t NaturalWidth(int64_t value);

// The AFL tables of 8, 16 and 32-bit boundary values.
std::vector<InterestingValue> DefaultInterestingValues();

struct MutatorOptions {
  // Relative frequency of each operator, indexed by MutationOp.
  std::array<double, kNumMutationOps> weights = {1, 1, 1, 1, 1, 1, 1, 1};
  // Appended to the default table.
  std::vector<int64_t> extra_values;
  size_t max_len = 1024;
  // Each mutation stacks 1..max_stack operators.
  uint32_t max_stack = 8;
};

class Mutator {
 public:
  // Throws ContractViolation on negative weights, all-zero weights, a zero
  // max_len or a zero max_stack.
  explicit Mutator(MutatorOptions options);

  // Returns a mutated copy of `input`, at most max_len bytes long. `pool`
  // supplies splice partners and may be empty. When `applied` is given it
  // receives the operators that changed the data, in order.
  std::vector<uint8_t> Mutate(std::span<const uint8_t> input, const Corpus &pool, Rng &rng,
                              std::vector<MutationOp> *applied = nullptr) const;

  // One operator. Returns false, leaving `data` alone, when the operator
  // does not apply (flipping a bit of an empty input, splicing without a
  // partner, growing past max_len).
  bool Apply(MutationOp op, std::vector<uint8_t> &data, const Corpus &pool, Rng &rng) const;

  const std::vector<InterestingValue> &values() const { return values_; }
  const MutatorOptions &options() const { return options_; }

 private:
  bool InsertValue(std::vector<uint8_t> &data, Rng &rng) const;

  MutatorOptions options_;
  std::vector<double> weights_;
  std::vector<InterestingValue> values_;
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_MUTATOR_H_
