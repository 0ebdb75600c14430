// Copyright 2026 The lsqforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsqforge/analysis.hpp"

#include <algorithm>
#include <functional>

namespace lsqforge::ir {

CfgAnalysis::CfgAnalysis(const Kernel& k) {
  build_cfg(k);
  build_dominators();
  build_postdominators();
  build_control_deps();
  build_loops();
}

void CfgAnalysis::build_cfg(const Kernel& k) {
  n_ = static_cast<int>(k.blocks.size());
  succs_.assign(n_, {});
  preds_.assign(n_, {});
  for (int b = 0; b < n_; ++b) {
    const auto& t = k.blocks[b].terminator();
    if (t.op == Op::kBr) {
      succs_[b] = {t.succ0};
    } else if (t.op == Op::kCondBr) {
      succs_[b] = {t.succ0, t.succ1};
    }
    for (int s : succs_[b]) preds_[s].push_back(b);
  }

  // Reverse postorder via iterative DFS in successor order.
  std::vector<int> state(n_, 0);
  std::vector<int> post;
  std::vector<std::pair<int, size_t>> stack;
  stack.emplace_back(0, 0);
  state[0] = 1;
  while (!stack.empty()) {
    auto& [b, i] = stack.back();
    if (i < succs_[b].size()) {
      int s = succs_[b][i++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.emplace_back(s, 0);
      }
    } else {
      post.push_back(b);
      stack.pop_back();
    }
  }
  rpo_.assign(post.rbegin(), post.rend());
  rpo_index_.assign(n_, -1);
  for (size_t i = 0; i < rpo_.size(); ++i) rpo_index_[rpo_[i]] = static_cast<int>(i);
  for (int b = 0; b < n_; ++b) {
    if (rpo_index_[b] < 0) throw AnalysisError("unreachable block: index " + std::to_string(b));
  }
}

namespace {

// Cooper-Harvey-Kennedy iterative dominators over an order where every node's
// relevant predecessors appear earlier.
std::vector<int> iterate_doms(int n, int root, const std::vector<std::vector<int>>& preds,
                              const std::vector<int>& order, const std::vector<int>& order_index) {
  std::vector<int> idom(n, -1);
  idom[root] = root;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (order_index[a] > order_index[b]) a = idom[a];
      while (order_index[b] > order_index[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b : order) {
      if (b == root) continue;
      int new_idom = -1;
      for (int p : preds[b]) {
        if (idom[p] < 0) continue;
        new_idom = new_idom < 0 ? p : intersect(new_idom, p);
      }
      if (new_idom >= 0 && idom[b] != new_idom) {
        idom[b] = new_idom;
        changed = true;
      }
    }
  }
  idom[root] = -1;
  return idom;
}

}  // namespace

void CfgAnalysis::build_dominators() {
  idom_ = iterate_doms(n_, 0, preds_, rpo_, rpo_index_);
  dom_depth_.assign(n_, 0);
  for (int b : rpo_) {
    if (idom_[b] >= 0) dom_depth_[b] = dom_depth_[idom_[b]] + 1;
  }
}

void CfgAnalysis::build_postdominators() {
  // Virtual exit node n_ joins all ret blocks; works on the reversed graph.
  int n = n_ + 1;
  std::vector<std::vector<int>> rpreds(n);  // predecessors in the reversed graph = succs
  std::vector<std::vector<int>> rsuccs(n);
  for (int b = 0; b < n_; ++b) {
    for (int s : succs_[b]) {
      rsuccs[s].push_back(b);
      rpreds[b].push_back(s);
    }
    if (succs_[b].empty()) {
      rsuccs[n_].push_back(b);
      rpreds[b].push_back(n_);
    }
  }
  // Postorder on the reversed graph from the virtual exit.
  std::vector<int> state(n, 0), post;
  std::vector<std::pair<int, size_t>> stack;
  stack.emplace_back(n_, 0);
  state[n_] = 1;
  while (!stack.empty()) {
    auto& [b, i] = stack.back();
    if (i < rsuccs[b].size()) {
      int s = rsuccs[b][i++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.emplace_back(s, 0);
      }
    } else {
      post.push_back(b);
      stack.pop_back();
    }
  }
  if (static_cast<int>(post.size()) != n) {
    throw AnalysisError("blocks unreachable from exit (infinite loop in CFG)");
  }
  std::vector<int> order(post.rbegin(), post.rend());
  std::vector<int> order_index(n, -1);
  for (size_t i = 0; i < order.size(); ++i) order_index[order[i]] = static_cast<int>(i);
  auto ipdom = iterate_doms(n, n_, rpreds, order, order_index);
  ipdom_.assign(ipdom.begin(), ipdom.begin() + n_);
  for (int b = 0; b < n_; ++b) {
    if (ipdom_[b] == n_) ipdom_[b] = -1;  // immediate post-dominator is the virtual exit
  }
}

bool CfgAnalysis::dominates(int a, int b) const {
  while (b >= 0) {
    if (a == b) return true;
    b = idom_[b];
  }
  return false;
}

bool CfgAnalysis::postdominates(int a, int b) const {
  while (b >= 0) {
    if (a == b) return true;
    b = ipdom_[b];
  }
  return false;
}

void CfgAnalysis::build_control_deps() {
  // Post-dominance frontier: b is control-dependent on a iff a is in PDF(b).
  cdeps_.assign(n_, {});
  for (int a = 0; a < n_; ++a) {
    if (succs_[a].size() < 2) continue;
    for (int s : succs_[a]) {
      // Walk up the post-dominator tree from s until reaching ipdom(a);
      // every block on the way is control-dependent on a.
      int runner = s;
      while (runner >= 0 && runner != ipdom_[a]) {
        if (!std::count(cdeps_[runner].begin(), cdeps_[runner].end(), a)) {
          cdeps_[runner].push_back(a);
        }
        runner = ipdom_[runner];
      }
    }
  }
  for (auto& v : cdeps_) std::sort(v.begin(), v.end());
}

bool CfgAnalysis::is_back_edge(int from, int to) const {
  for (auto [f, t] : back_edges_) {
    if (f == from && t == to) return true;
  }
  return false;
}

bool CfgAnalysis::is_loop_header(int b) const {
  for (const auto& l : loops_) {
    if (l.header == b) return true;
  }
  return false;
}

void CfgAnalysis::build_loops() {
  // A back edge is an edge to a dominator; natural-loop bodies are collected
  // by walking predecessors from the latch. Irreducible CFGs (an edge into a
  // loop body that bypasses the header) are rejected.
  loop_of_.assign(n_, -1);
  std::vector<std::pair<int, int>> edges;
  for (int b = 0; b < n_; ++b) {
    for (int s : succs_[b]) {
      if (dominates(s, b)) {
        edges.emplace_back(b, s);
      } else if (rpo_index_[s] <= rpo_index_[b]) {
        throw AnalysisError("irreducible control flow: retreating edge " + std::to_string(b) +
                            " -> " + std::to_string(s) + " to a non-dominator");
      }
    }
  }
  back_edges_ = edges;

  // One loop per header; merge multiple back edges.
  for (auto [latch, header] : edges) {
    LoopInfo* loop = nullptr;
    for (auto& l : loops_) {
      if (l.header == header) loop = &l;
    }
    if (loop == nullptr) {
      loops_.push_back({});
      loop = &loops_.back();
      loop->header = header;
      loop->body = {header};
    }
    loop->latches.push_back(latch);
    std::vector<int> work = {latch};
    while (!work.empty()) {
      int b = work.back();
      work.pop_back();
      if (loop->contains(b)) continue;  // header is pre-inserted, stopping the walk
      loop->body.push_back(b);
      for (int p : preds_[b]) work.push_back(p);
    }
  }

  // Sort loops outermost-first by body size so nesting assignment is simple.
  std::sort(loops_.begin(), loops_.end(),
            [](const LoopInfo& a, const LoopInfo& b) { return a.body.size() > b.body.size(); });
  for (size_t i = 0; i < loops_.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (loops_[j].contains(loops_[i].header)) {
        loops_[i].parent = static_cast<int>(j);  // smallest enclosing seen last
      }
    }
    loops_[i].depth = loops_[i].parent >= 0 ? loops_[loops_[i].parent].depth + 1 : 1;
    for (int b : loops_[i].body) loop_of_[b] = static_cast<int>(i);
  }
}

}  // namespace lsqforge::ir
