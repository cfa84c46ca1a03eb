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

#include "reachfuzz/mutator.h"

#include <algorithm>
#include <numeric>

#include "reachfuzz/error.h"
#include "reachfuzz/scheduler.h"

namespace reachfuzz {
namespace {

constexpr std::array<std::string_view, kNumMutationOps> kOpNames = {
    "bit_flip", "byte_flip", "random_byte", "arithmetic",
    "interesting_value", "delete_block", "duplicate_block", "splice",
};

constexpr int64_t kInteresting8[] = {-128, -1, 0, 1, 16, 32, 64, 100, 127};
constexpr int64_t kInteresting16[] = {-32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767};
constexpr int64_t kInteresting32[] = {-2147483648LL, -100663046, -32769, 32768, 65535,
                                      65536,         100663045,  2147483647};

constexpr int kMaxArith = 35;
constexpr size_t kMaxBlockLen = 16;

size_t BlockLen(size_t limit, Rng &rng) { return 1 + rng.Below(std::min(limit, kMaxBlockLen)); }

}  // namespace

std::string_view MutationOpName(MutationOp op) { return kOpNames[static_cast<size_t>(op)]; }

std::optional<MutationOp> ParseMutationOp(std::string_view name) {
  for (size_t i = 0; i < kNumMutationOps; ++i) {
    if (kOpNames[i] == name) return static_cast<MutationOp>(i);
  }
  return std::nullopt;
}

uint8_t NaturalWidth(int64_t value) {
  for (uint8_t width : {1, 2, 4}) {
    const int bits = 8 * width;
    const int64_t smin = -(int64_t{1} << (bits - 1));
    const int64_t umax = (int64_t{1} << bits) - 1;
    if (value >= smin && value <= umax) return width;
  }
  return 8;
}

std::vector<InterestingValue> DefaultInterestingValues() {
  std::vector<InterestingValue> values;
  for (int64_t v : kInteresting8) values.push_back({v, NaturalWidth(v)});
  for (int64_t v : kInteresting16) values.push_back({v, NaturalWidth(v)});
  for (int64_t v : kInteresting32) values.push_back({v, NaturalWidth(v)});
  return values;
}

Mutator::Mutator(MutatorOptions options) : options_(std::move(options)) {
  double total = 0;
  for (double w : options_.weights) {
    if (!(w >= 0)) throw ContractViolation("mutation weights must be non-negative");
    total += w;
  }
  if (total <= 0) throw ContractViolation("at least one mutation weight must be positive");
  if (options_.max_len == 0) throw ContractViolation("max_len must be positive");
  if (options_.max_stack == 0) throw ContractViolation("max_stack must be positive");
  weights_.assign(options_.weights.begin(), options_.weights.end());
  values_ = DefaultInterestingValues();
  for (int64_t v : options_.extra_values) {
    InterestingValue value{v, NaturalWidth(v)};
    if (std::find(values_.begin(), values_.end(), value) == values_.end()) {
      values_.push_back(value);
    }
  }
}

std::vector<uint8_t> Mutator::Mutate(std::span<const uint8_t> input, const Corpus &pool, Rng &rng,
                                     std::vector<MutationOp> *applied) const {
  std::vector<uint8_t> data(input.begin(), input.end());
  if (data.size() > options_.max_len) data.resize(options_.max_len);
  const uint64_t stack = 1 + rng.Below(options_.max_stack);
  for (uint64_t i = 0; i < stack; ++i) {
    auto op = static_cast<MutationOp>(SampleProportional(weights_, rng));
    if (Apply(op, data, pool, rng) && applied) applied->push_back(op);
  }
  return data;
}

bool Mutator::InsertValue(std::vector<uint8_t> &data, Rng &rng) const {
  const InterestingValue &value = values_[rng.Below(values_.size())];
  static constexpr uint8_t kWidths[] = {1, 2, 4, 8};
  const uint8_t *first = std::find(std::begin(kWidths), std::end(kWidths), value.width);
  const uint8_t width = first[rng.Below(std::end(kWidths) - first)];
  uint8_t bytes[8];
  const auto raw = static_cast<uint64_t>(value.value);
  const bool big_endian = width > 1 && rng.Below(2) == 1;
  for (uint8_t i = 0; i < width; ++i) {
    bytes[big_endian ? width - 1 - i : i] = static_cast<uint8_t>(raw >> (8 * i));
  }
  const bool can_overwrite = data.size() >= width;
  const bool can_insert = data.size() + width <= options_.max_len;
  if (!can_overwrite && !can_insert) return false;
  if (can_overwrite && (!can_insert || rng.Below(4) != 0)) {
    std::copy_n(bytes, width, data.begin() + rng.Below(data.size() - width + 1));
  } else {
    data.insert(data.begin() + rng.Below(data.size() + 1), bytes, bytes + width);
  }
  return true;
}

bool Mutator::Apply(MutationOp op, std::vector<uint8_t> &data, const Corpus &pool,
                    Rng &rng) const {
  switch (op) {
    case MutationOp::kBitFlip:
      if (data.empty()) return false;
      data[rng.Below(data.size())] ^= static_cast<uint8_t>(1u << rng.Below(8));
      return true;
    case MutationOp::kByteFlip:
      if (data.empty()) return false;
      data[rng.Below(data.size())] ^= 0xFF;
      return true;
    case MutationOp::kRandomByte:
      if (data.empty()) return false;
      data[rng.Below(data.size())] ^= static_cast<uint8_t>(1 + rng.Below(255));
      return true;
    case MutationOp::kArithmetic: {
      if (data.empty()) return false;
      auto delta = static_cast<uint8_t>(1 + rng.Below(kMaxArith));
      uint8_t &byte = data[rng.Below(data.size())];
      byte = rng.Below(2) ? static_cast<uint8_t>(byte + delta) : static_cast<uint8_t>(byte - delta);
      return true;
    }
    case MutationOp::kInterestingValue:
      return InsertValue(data, rng);
    case MutationOp::kDeleteBlock: {
      if (data.size() < 2) return false;
      size_t len = BlockLen(data.size() - 1, rng);
      size_t at = rng.Below(data.size() - len + 1);
      data.erase(data.begin() + at, data.begin() + at + len);
      return true;
    }
    case MutationOp::kDuplicateBlock: {
      if (data.empty() || data.size() >= options_.max_len) return false;
      size_t len = BlockLen(std::min(data.size(), options_.max_len - data.size()), rng);
      size_t from = rng.Below(data.size() - len + 1);
      size_t to = rng.Below(data.size() + 1);
      std::vector<uint8_t> block(data.begin() + from, data.begin() + from + len);
      data.insert(data.begin() + to, block.begin(), block.end());
      return true;
    }
    case MutationOp::kSplice: {
      if (pool.empty()) return false;
      const std::vector<uint8_t> &other = pool[rng.Below(pool.size())].input;
      if (other.empty()) return false;
      size_t head = rng.Below(data.size() + 1);
      size_t tail = rng.Below(other.size());
      data.resize(head);
      data.insert(data.end(), other.begin() + tail, other.end());
      if (data.size() > options_.max_len) data.resize(options_.max_len);
      return true;
    }
  }
  return false;
}

}  // namespace reachfuzz
