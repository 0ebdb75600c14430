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

#ifndef LSQFORGE_ANALYSIS_HPP_
#define LSQFORGE_ANALYSIS_HPP_

#include <set>
#include <utility>
#include <vector>

#include "lsqforge/ir.hpp"

namespace lsqforge::ir {

struct LoopInfo {
  int header = -1;
  std::vector<int> latches;      // blocks with a back edge to header
  std::vector<int> body;         // all blocks in the loop, header first
  int parent = -1;               // index of enclosing loop, -1 for top level
  int depth = 1;

  bool contains(int block) const {
    for (int b : body) {
      if (b == block) return true;
    }
    return false;
  }
};

// Dominators, post-dominators, control dependence, and natural loops for one
// kernel. Control dependence is computed from post-dominance frontiers.
class CfgAnalysis {
 public:
  explicit CfgAnalysis(const Kernel& k);

  int num_blocks() const { return n_; }
  const std::vector<int>& succs(int b) const { return succs_[b]; }
  const std::vector<int>& preds(int b) const { return preds_[b]; }

  int idom(int b) const { return idom_[b]; }       // -1 for entry
  int ipostdom(int b) const { return ipdom_[b]; }  // -1 for the virtual exit
  bool dominates(int a, int b) const;
  bool postdominates(int a, int b) const;
  int dom_depth(int b) const { return dom_depth_[b]; }

  // b is control-dependent on the blocks in control_deps(b).
  const std::vector<int>& control_deps(int b) const { return cdeps_[b]; }

  const std::vector<LoopInfo>& loops() const { return loops_; }
  // Innermost loop containing the block, or -1.
  int loop_of(int b) const { return loop_of_[b]; }
  bool is_back_edge(int from, int to) const;
  bool is_loop_header(int b) const;

  // Reverse postorder over forward edges.
  const std::vector<int>& rpo() const { return rpo_; }
  int rpo_index(int b) const { return rpo_index_[b]; }

 private:
  void build_cfg(const Kernel& k);
  void build_dominators();
  void build_postdominators();
  void build_control_deps();
  void build_loops();

  int n_ = 0;
  std::vector<std::vector<int>> succs_, preds_;
  std::vector<int> idom_, ipdom_;
  std::vector<int> dom_depth_;
  std::vector<std::vector<int>> cdeps_;
  std::vector<LoopInfo> loops_;
  std::vector<int> loop_of_;
  std::vector<int> rpo_, rpo_index_;
  std::vector<std::pair<int, int>> back_edges_;
};

struct AnalysisError : std::runtime_error {
  explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lsqforge::ir

#endif  // LSQFORGE_ANALYSIS_HPP_
