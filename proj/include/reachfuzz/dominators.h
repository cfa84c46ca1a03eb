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

#ifndef REACHFUZZ_DOMINATORS_H_
#define REACHFUZZ_DOMINATORS_H_

#include <cstdint>
#include <vector>

namespace reachfuzz {

// Directed graph over nodes 0..n-1 given as successor lists.
using Digraph = std::vector<std::vector<int32_t>>;

// Immediate dominators of every node reachable from `root`, computed with
// the iterative algorithm of Cooper, Harvey and Kennedy. idom[root] == root;
// nodes unreachable from `root` get -1.
std::vector<int32_t> ImmediateDominators(const Digraph &graph, int32_t root);

class DominatorTree {
 public:
  DominatorTree() = default;
  DominatorTree(const Digraph &graph, int32_t root);

  // Whether `a` dominates `b` (reflexive). False if either is unreachable.
  bool Dominates(int32_t a, int32_t b) const;
  bool Reachable(int32_t node) const { return idom_[node] >= 0; }
  int32_t idom(int32_t node) const { return idom_[node]; }
  int32_t root() const { return root_; }

 private:
  std::vector<int32_t> idom_;
  std::vector<int32_t> depth_;
  int32_t root_ = 0;
};

// Dominators and post-dominators of a function CFG. Post-dominance is
// computed on the reversed graph with a virtual exit joined from every node
// without successors, so functions with several returns or aborts work. Nodes
// that cannot reach any exit post-dominate nothing and are post-dominated by
// nothing.
class DominatorAnalysis {
 public:
  DominatorAnalysis(const Digraph &cfg, int32_t entry);

  bool Dominates(int32_t a, int32_t b) const { return dom_.Dominates(a, b); }
  bool PostDominates(int32_t a, int32_t b) const;
  bool ReachableFromEntry(int32_t node) const { return dom_.Reachable(node); }
  // Immediate dominator, or -1 for the entry and unreachable nodes.
  int32_t ImmediateDominator(int32_t node) const;

 private:
  int32_t num_nodes_;
  DominatorTree dom_;
  DominatorTree post_dom_;  // over num_nodes_ + 1 nodes, root = virtual exit
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_DOMINATORS_H_
