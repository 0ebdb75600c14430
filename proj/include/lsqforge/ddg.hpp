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

#ifndef LSQFORGE_DDG_HPP_
#define LSQFORGE_DDG_HPP_

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "lsqforge/analysis.hpp"
#include "lsqforge/ir.hpp"

namespace lsqforge::ir {

// Operation latencies in cycles. These define the modeled datapath; the
// recurrence IIs and queue sizes reported by the tool are relative to it.
struct LatencyTable {
  int konst = 0;
  int binop = 1;      // add/sub/logic/shift/min/max
  int cmp = 1;
  int mul = 3;
  int divmod = 24;
  int select = 1;
  int load = 1;       // on-chip private array read
  int store = 1;
  int channel_op = 0; // handshake itself; transfer latency lives on the channel
  int pred_penalty = 1;  // branch resolution before a guarded instruction starts
  int mem_edge = 0;      // store -> next-iteration load visibility

  int of(const Instruction& ins) const;
};

enum class DepKind { kData, kMemory, kControl };

struct DdgEdge {
  int src = -1;       // instruction id
  int dst = -1;
  DepKind kind = DepKind::kData;
  int distance = 0;   // iterations between producer and consumer
  int latency = 0;    // cycles contributed when traversing this edge
  bool static_distance = false;  // memory edge with a proven constant distance
};

// Dependence graph for one loop body (or the whole kernel when built with
// loop = -1). Distances are relative to the chosen loop's iterations.
struct Ddg {
  std::vector<int> nodes;               // instruction ids
  std::vector<DdgEdge> edges;
  std::vector<std::vector<int>> out;    // node index -> edge indices
  std::vector<std::vector<int>> in;
  std::map<int, int> node_index;        // instruction id -> node index

  int index_of(int instr_id) const;
};

struct DdgOptions {
  bool control_edges = true;    // predication edges cond -> guarded instr
  bool memory_edges = true;
  // Treat LSQ-protected loads as zero-latency sources (their value arrives
  // over a channel); used for the load-to-store delay computation.
  std::set<int> zero_latency_loads;  // instruction ids
};

Ddg build_ddg(const Module& m, const Kernel& k, const CfgAnalysis& cfg, const LatencyTable& lat,
              int loop, const DdgOptions& opts = {});

// Result of the single-induction affine address analysis for one memory
// instruction inside one loop: addr = scale * iv0 + offset, where iv0 is the
// induction variable's value at the start of the iteration.
struct AffineAddr {
  bool known = false;
  Word scale = 0;
  Word offset = 0;
  Word iv_step = 0;  // induction increment per iteration, 0 if none
};

// Relationship between a store and a later load on the same base.
enum class MemDep {
  kDisjoint,        // provably never the same address
  kStaticDistance,  // store at iteration i feeds load at i + distance
  kUnknown,         // cannot be resolved at compile time
};

struct MemDepResult {
  MemDep kind = MemDep::kUnknown;
  int distance = 1;
};

MemDepResult classify_mem_dep(const Module& m, const Kernel& k, const CfgAnalysis& cfg, int loop,
                              const Instruction& store, const Instruction& load);

// Kernel-wide register/memory value flow for decoupling queries: edge
// def -> use over registers plus conservative same-base store -> load value
// flow. Control dependence is deliberately not part of this graph.
struct DataFlow {
  int n = 0;                           // number of instructions
  std::vector<std::vector<int>> out;   // instr id -> consumer instr ids

  // True if a value path from `from` to `to` exists.
  bool reaches(int from, int to) const;
  std::vector<char> reachable_from(const std::vector<int>& seeds) const;
};

DataFlow build_data_flow(const Module& m, const Kernel& k, const CfgAnalysis& cfg);

// recII = max over DDG recurrences of ceil(delay / distance), >= 1.
// Requires a per-loop DDG.
int rec_ii(const Ddg& ddg);

// ASAP schedule makespan of one iteration (distance-0 edges only).
int body_latency(const Kernel& k, const Ddg& ddg, const LatencyTable& lat);

// Longest distance-0 path delay from any instruction in `from` to any in
// `to`, counting edge latencies; -1 if no path.
int longest_path(const Ddg& ddg, const std::set<int>& from, const std::set<int>& to);

}  // namespace lsqforge::ir

#endif  // LSQFORGE_DDG_HPP_
