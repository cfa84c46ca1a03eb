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

#ifndef REACHFUZZ_CORPUS_H_
#define REACHFUZZ_CORPUS_H_

#include <cstdint>
#include <vector>

namespace reachfuzz {

struct CorpusEntry {
  uint64_t id = 0;  // position in the corpus
  std::vector<uint8_t> input;
  uint64_t exec_time = 1;  // interpreter steps, at least 1
  std::vector<uint32_t> covered;  // coverage indices, sorted
  uint64_t discovered_at = 0;  // executions done when it was found
  uint64_t selected_count = 0;
};

using Corpus = std::vector<CorpusEntry>;

}  // namespace reachfuzz

#endif  // REACHFUZZ_CORPUS_H_
