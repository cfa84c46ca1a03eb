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

#include "reachfuzz/dominators.h"

#include <algorithm>

namespace reachfuzz {

std::vector<int32_t> ImmediateDominators(const Digraph &graph, int32_t root) {
  const auto n = static_cast<int32_t>(graph.size());
  // Reverse postorder by iterative DFS.
  std::vector<int32_t> order;
  std::vector<int32_t> rpo_number(n, -1);
  std::vector<uint8_t> seen(n, 0);
  std::vector<std::pair<int32_t, size_t>> stack{{root, 0}};
  seen[root] = 1;
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < graph[node].size()) {
      int32_t succ = graph[node][next++];
      if (!seen[succ]) {
        seen[succ] = 1;
        stack.emplace_back(succ, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  for (size_t i = 0; i < order.size(); ++i) rpo_number[order[i]] = static_cast<int32_t>(i);

  Digraph preds(n);
  for (int32_t u : order) {
    for (int32_t v : graph[u]) preds[v].push_back(u);
  }

  std::vector<int32_t> idom(n, -1);
  idom[root] = root;
  auto intersect = [&](int32_t a, int32_t b) {
    while (a != b) {
      while (rpo_number[a] > rpo_number[b]) a = idom[a];
      while (rpo_number[b] > rpo_number[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 1; i < order.size(); ++i) {
      int32_t node = order[i];
      int32_t new_idom = -1;
      for (int32_t p : preds[node]) {
        if (idom[p] < 0) continue;
        new_idom = new_idom < 0 ? p : intersect(p, new_idom);
      }
      if (new_idom != idom[node]) {
        idom[node] = new_idom;
        changed = true;
      }
    }
  }
  return idom;
}

DominatorTree::DominatorTree(const Digraph &graph, int32_t root)
    : idom_(ImmediateDominators(graph, root)), depth_(graph.size(), -1), root_(root) {
  // Depths let Dominates() walk only the deeper node upwards.
  depth_[root] = 0;
  for (size_t node = 0; node < graph.size(); ++node) {
    if (idom_[node] < 0) continue;
    std::vector<int32_t> chain;
    auto v = static_cast<int32_t>(node);
    while (depth_[v] < 0) {
      chain.push_back(v);
      v = idom_[v];
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth_[*it] = depth_[idom_[*it]] + 1;
  }
}

bool DominatorTree::Dominates(int32_t a, int32_t b) const {
  if (idom_[a] < 0 || idom_[b] < 0) return false;
  while (depth_[b] > depth_[a]) b = idom_[b];
  return a == b;
}

DominatorAnalysis::DominatorAnalysis(const Digraph &cfg, int32_t entry)
    : num_nodes_(static_cast<int32_t>(cfg.size())), dom_(cfg, entry) {
  const int32_t exit = num_nodes_;
  Digraph reversed(cfg.size() + 1);
  for (int32_t u = 0; u < num_nodes_; ++u) {
    if (cfg[u].empty()) reversed[exit].push_back(u);
    for (int32_t v : cfg[u]) reversed[v].push_back(u);
  }
  post_dom_ = DominatorTree(reversed, exit);
}

bool DominatorAnalysis::PostDominates(int32_t a, int32_t b) const {
  return post_dom_.Dominates(a, b);
}

int32_t DominatorAnalysis::ImmediateDominator(int32_t node) const {
  if (node == dom_.root()) return -1;
  return dom_.idom(node);
}

}  // namespace reachfuzz
