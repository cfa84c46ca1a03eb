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

#include "reachfuzz/ir.h"

#include <algorithm>

#include "reachfuzz/error.h"

namespace reachfuzz {

ParseError::ParseError(const std::string &message, int line, int column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
            message),
      line_(line),
      column_(column) {}

CfgFormatError::CfgFormatError(const std::string &message, uint64_t offset)
    : Error("corrupt CFG dump at byte " + std::to_string(offset) + ": " +
            message),
      offset_(offset) {}

std::vector<int32_t> Terminator::Successors() const {
  std::vector<int32_t> result;
  result.reserve(targets.size());
  for (int32_t target : targets) {
    if (std::find(result.begin(), result.end(), target) == result.end()) {
      result.push_back(target);
    }
  }
  return result;
}

const IrFunction *IrModule::FindFunction(const std::string &fn_name) const {
  for (const IrFunction &fn : functions) {
    if (fn.name == fn_name) return &fn;
  }
  return nullptr;
}

size_t IrModule::NumBlocks() const {
  size_t n = 0;
  for (const IrFunction &fn : functions) n += fn.blocks.size();
  return n;
}

uint64_t Fnv1a64(const void *data, size_t size, uint64_t seed) {
  const auto *bytes = static_cast<const uint8_t *>(data);
  uint64_t hash = seed;
  for (size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

uint64_t CombineChecksums(const std::vector<uint64_t> &checksums) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (uint64_t c : checksums) {
    uint8_t bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<uint8_t>(c >> (8 * i));
    hash = Fnv1a64(bytes, sizeof(bytes), hash);
  }
  return hash;
}

}  // namespace reachfuzz
