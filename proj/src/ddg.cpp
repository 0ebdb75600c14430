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

#include "lsqforge/ddg.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace lsqforge::ir {

int LatencyTable::of(const Instruction& ins) const {
  switch (ins.op) {
    case Op::kConst:
      return konst;
    case Op::kMul:
      return mul;
    case Op::kDiv:
    case Op::kMod:
      return divmod;
    case Op::kEq:
    case Op::kNe:
    case Op::kLt:
    case Op::kLe:
    case Op::kGt:
    case Op::kGe:
      return cmp;
    case Op::kSelect:
      return select;
    case Op::kLoad:
      return load;
    case Op::kStore:
      return store;
    case Op::kChRead:
    case Op::kChWrite:
    case Op::kLdAlloc:
    case Op::kStAlloc:
    case Op::kStValWrite:
      return channel_op;
    case Op::kBr:
    case Op::kCondBr:
    case Op::kRet:
      return 0;
    default:
      return binop;
  }
}

int Ddg::index_of(int instr_id) const {
  auto it = node_index.find(instr_id);
  return it == node_index.end() ? -1 : it->second;
}

namespace {

// Reaching definition: a def site plus whether it flows around the analyzed
// loop's back edge (carried from the previous iteration).
using DefSet = std::set<std::pair<int, bool>>;
using RegState = std::map<int, DefSet>;

void merge_into(RegState& dst, const RegState& src) {
  for (const auto& [reg, defs] : src) dst[reg].insert(defs.begin(), defs.end());
}

// Walks blocks in RPO over the loop body DAG (back edges to the header cut),
// seeding the header with `header_in`. Returns the state at each latch end
// and optionally reports every (def -> use) pair.
using UseFn = std::function<void(int def_instr, bool carried, int use_instr)>;

std::map<int, RegState> dag_pass(const Kernel& k, const CfgAnalysis& cfg,
                                 const std::vector<int>& body_rpo, int header,
                                 const RegState& header_in, const UseFn& on_use) {
  std::map<int, RegState> out_state;
  std::map<int, RegState> in_state;
  in_state[header] = header_in;
  std::set<int> in_body(body_rpo.begin(), body_rpo.end());
  for (int b : body_rpo) {
    RegState state = in_state[b];
    for (const auto& ins : k.blocks[b].instrs) {
      if (on_use) {
        for (int i = 0; i < 3; ++i) {
          int r = ins.args[i];
          if (r < 0) continue;
          auto it = state.find(r);
          if (it == state.end()) continue;  // defined outside the loop
          for (auto [def, carried] : it->second) on_use(def, carried, ins.id);
        }
      }
      if (ins.dst >= 0) state[ins.dst] = {{ins.id, false}};
    }
    out_state[b] = state;
    for (int s : cfg.succs(b)) {
      if (!in_body.count(s) || s == header) continue;  // exit or back edge
      merge_into(in_state[s], state);
    }
  }
  return out_state;
}

std::vector<int> body_in_rpo(const CfgAnalysis& cfg, const LoopInfo& loop) {
  std::vector<int> body = loop.body;
  std::sort(body.begin(), body.end(),
            [&](int a, int b) { return cfg.rpo_index(a) < cfg.rpo_index(b); });
  return body;
}

// ---------------------------------------------------------------------------
// Affine address analysis (single symbolic pass per innermost loop).
// Every register value is tracked as sum(coef_i * sym_i) + c where symbols are
// induction-variable start-of-iteration values and loop-invariant registers.

struct Affine {
  bool known = false;
  std::map<int, Word> coefs;  // symbol (register id) -> coefficient
  Word c = 0;
};

Affine aff_unknown() { return {}; }
Affine aff_const(Word v) {
  Affine a;
  a.known = true;
  a.c = v;
  return a;
}
Affine aff_sym(int reg) {
  Affine a;
  a.known = true;
  a.coefs[reg] = 1;
  return a;
}

Affine aff_add(const Affine& x, const Affine& y, Word sign) {
  if (!x.known || !y.known) return aff_unknown();
  Affine r = x;
  for (auto [s, c] : y.coefs) {
    r.coefs[s] += sign * c;
    if (r.coefs[s] == 0) r.coefs.erase(s);
  }
  r.c += sign * y.c;
  return r;
}

Affine aff_mul(const Affine& x, const Affine& y) {
  if (!x.known || !y.known) return aff_unknown();
  const Affine* scalar = x.coefs.empty() ? &x : (y.coefs.empty() ? &y : nullptr);
  if (scalar == nullptr) return aff_unknown();
  const Affine& other = (scalar == &x) ? y : x;
  Affine r;
  r.known = true;
  r.c = other.c * scalar->c;
  for (auto [s, c] : other.coefs) {
    if (c * scalar->c != 0) r.coefs[s] = c * scalar->c;
  }
  return r;
}

bool aff_equal_coefs(const Affine& a, const Affine& b) { return a.coefs == b.coefs; }

struct AffineLoopInfo {
  bool valid = false;
  std::map<int, Word> iv_step;          // induction reg -> per-iteration step
  std::map<int, Affine> addr_of_instr;  // memory instr id -> address expression
};

AffineLoopInfo analyze_affine(const Kernel& k, const CfgAnalysis& cfg, int loop_idx) {
  AffineLoopInfo result;
  const LoopInfo& loop = cfg.loops()[loop_idx];
  for (size_t j = 0; j < cfg.loops().size(); ++j) {
    if (cfg.loops()[j].parent == loop_idx) return result;  // only innermost loops
  }
  std::set<int> in_body(loop.body.begin(), loop.body.end());

  // Defs per register inside the body.
  std::map<int, std::vector<const Instruction*>> defs;
  std::map<int, std::vector<int>> def_blocks;
  for (int b : loop.body) {
    for (const auto& ins : k.blocks[b].instrs) {
      if (ins.dst >= 0) {
        defs[ins.dst].push_back(&ins);
        def_blocks[ins.dst].push_back(b);
      }
    }
  }
  auto const_value = [&](int reg) -> std::optional<Word> {
    // A register is a known constant if its only def in the kernel is kConst.
    std::optional<Word> v;
    for (const auto& blk : k.blocks) {
      for (const auto& ins : blk.instrs) {
        if (ins.dst != reg) continue;
        if (ins.op != Op::kConst || v.has_value()) return std::nullopt;
        v = ins.imm;
      }
    }
    return v;
  };

  // Induction variables: single unconditional def `r = r +/- const`.
  for (const auto& [reg, dlist] : defs) {
    if (dlist.size() != 1) continue;
    const Instruction& d = *dlist[0];
    if (d.op != Op::kAdd && d.op != Op::kSub) continue;
    if (d.args[0] != reg) continue;
    auto step = const_value(d.args[1]);
    if (!step) continue;
    bool unconditional = true;
    for (int latch : loop.latches) {
      if (!cfg.dominates(def_blocks.at(reg)[0], latch)) unconditional = false;
    }
    if (!unconditional) continue;
    result.iv_step[reg] = d.op == Op::kAdd ? *step : -*step;
  }

  // Symbolic pass over the body DAG.
  std::map<int, std::map<int, Affine>> block_in;  // block -> reg -> affine
  std::map<int, Affine>& header_in = block_in[loop.header];
  for (auto [reg, step] : result.iv_step) header_in[reg] = aff_sym(reg);

  auto value_of = [&](std::map<int, Affine>& state, int reg) -> Affine {
    auto it = state.find(reg);
    if (it != state.end()) return it->second;
    if (defs.count(reg)) return aff_unknown();  // defined in body, not yet seen on this path
    return aff_sym(reg);                        // loop invariant
  };

  std::set<int> seen_blocks;
  for (int b : body_in_rpo(cfg, loop)) {
    std::map<int, Affine> state = block_in[b];
    for (const auto& ins : k.blocks[b].instrs) {
      if (ins.op == Op::kLoad || ins.op == Op::kStore || ins.op == Op::kLdAlloc ||
          ins.op == Op::kStAlloc) {
        result.addr_of_instr[ins.id] = value_of(state, ins.args[0]);
      }
      if (ins.dst < 0) continue;
      Affine v;
      switch (ins.op) {
        case Op::kConst:
          v = aff_const(ins.imm);
          break;
        case Op::kAdd:
          v = aff_add(value_of(state, ins.args[0]), value_of(state, ins.args[1]), 1);
          break;
        case Op::kSub:
          v = aff_add(value_of(state, ins.args[0]), value_of(state, ins.args[1]), -1);
          break;
        case Op::kMul:
          v = aff_mul(value_of(state, ins.args[0]), value_of(state, ins.args[1]));
          break;
        default:
          v = aff_unknown();
          break;
      }
      state[ins.dst] = v;
    }
    for (int s : cfg.succs(b)) {
      if (!in_body.count(s) || s == loop.header) continue;
      if (!seen_blocks.count(s)) {
        block_in[s] = state;
        seen_blocks.insert(s);
      } else {
        // Merge: keep only agreeing values.
        auto& dst = block_in[s];
        for (auto it = dst.begin(); it != dst.end();) {
          auto jt = state.find(it->first);
          bool same = jt != state.end() && jt->second.known && it->second.known &&
                      jt->second.coefs == it->second.coefs && jt->second.c == it->second.c;
          if (same) {
            ++it;
          } else {
            it->second = aff_unknown();
            ++it;
          }
        }
        for (const auto& [reg, val] : state) {
          if (!dst.count(reg)) dst[reg] = aff_unknown();
        }
      }
    }
  }
  result.valid = true;
  return result;
}

}  // namespace

MemDepResult classify_mem_dep(const Module& m, const Kernel& k, const CfgAnalysis& cfg, int loop,
                              const Instruction& store, const Instruction& load) {
  (void)m;
  if (loop < 0) return {MemDep::kUnknown, 1};
  const AffineLoopInfo info = analyze_affine(k, cfg, loop);
  if (!info.valid) return {MemDep::kUnknown, 1};

  auto sit = info.addr_of_instr.find(store.id);
  auto lit = info.addr_of_instr.find(load.id);
  if (sit == info.addr_of_instr.end() || lit == info.addr_of_instr.end()) {
    return {MemDep::kUnknown, 1};
  }
  const Affine& as = sit->second;
  const Affine& al = lit->second;
  if (!as.known || !al.known) return {MemDep::kUnknown, 1};
  if (!aff_equal_coefs(as, al)) return {MemDep::kUnknown, 1};

  // Same symbolic shape: load at iteration k+j aliases store at iteration k
  // iff j * velocity == store.c - load.c, velocity = sum(coef * step).
  Word velocity = 0;
  for (auto [sym, coef] : as.coefs) {
    auto st = info.iv_step.find(sym);
    if (st != info.iv_step.end()) velocity += coef * st->second;
  }
  Word delta = as.c - al.c;
  if (velocity == 0) {
    if (delta == 0) return {MemDep::kStaticDistance, 1};  // same address every iteration
    return {MemDep::kDisjoint, 0};
  }
  if (delta % velocity != 0) return {MemDep::kDisjoint, 0};
  Word j = delta / velocity;
  if (j >= 1) return {MemDep::kStaticDistance, static_cast<int>(j)};
  if (j == 0) return {MemDep::kStaticDistance, 0};  // same-iteration pair
  return {MemDep::kDisjoint, 0};  // load only sees addresses stored later (no flow)
}

Ddg build_ddg(const Module& m, const Kernel& k, const CfgAnalysis& cfg, const LatencyTable& lat,
              int loop_idx, const DdgOptions& opts) {
  Ddg g;
  std::vector<int> body_blocks;
  int header = -1;
  if (loop_idx >= 0) {
    const LoopInfo& loop = cfg.loops()[loop_idx];
    body_blocks = body_in_rpo(cfg, loop);
    header = loop.header;
  } else {
    for (int b : cfg.rpo()) body_blocks.push_back(b);
    header = 0;
  }
  std::set<int> in_body(body_blocks.begin(), body_blocks.end());
  for (int b : body_blocks) {
    for (const auto& ins : k.blocks[b].instrs) {
      g.node_index[ins.id] = static_cast<int>(g.nodes.size());
      g.nodes.push_back(ins.id);
    }
  }
  auto node_lat = [&](const Instruction& ins) {
    if (ins.op == Op::kLoad && opts.zero_latency_loads.count(ins.id)) return 0;
    return lat.of(ins);
  };
  auto add_edge = [&](int src, int dst, DepKind kind, int distance, int latency,
                      bool static_dist = false) {
    if (!g.node_index.count(src) || !g.node_index.count(dst)) return;
    g.edges.push_back({src, dst, kind, distance, latency, static_dist});
  };

  // Data edges from reaching definitions over the body DAG. Pass 1 collects
  // the defs that survive to the latches; pass 2 attributes uses.
  auto use_edges = [&](int def, bool carried, int use) {
    add_edge(def, use, DepKind::kData, carried ? 1 : 0, node_lat(k.instr(def)));
  };
  if (loop_idx >= 0) {
    auto latch_out = dag_pass(k, cfg, body_blocks, header, {}, nullptr);
    RegState carried_in;
    for (int latch : cfg.loops()[loop_idx].latches) {
      for (const auto& [reg, defs] : latch_out[latch]) {
        for (auto [d, carried] : defs) carried_in[reg].insert({d, true});
      }
    }
    dag_pass(k, cfg, body_blocks, header, carried_in, use_edges);
  } else {
    // Whole kernel: iterate reaching defs to a fixpoint, then record uses.
    std::map<int, RegState> in_state, out_state;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int b : body_blocks) {
        RegState state = in_state[b];
        for (const auto& ins : k.blocks[b].instrs) {
          if (ins.dst >= 0) state[ins.dst] = {{ins.id, false}};
        }
        if (out_state[b] != state) {
          out_state[b] = state;
          changed = true;
        }
        for (int s : cfg.succs(b)) {
          RegState merged = in_state[s];
          merge_into(merged, state);
          if (merged != in_state[s]) {
            in_state[s] = merged;
            changed = true;
          }
        }
      }
    }
    for (int b : body_blocks) {
      RegState state = in_state[b];
      for (const auto& ins : k.blocks[b].instrs) {
        for (int i = 0; i < 3; ++i) {
          int r = ins.args[i];
          if (r < 0) continue;
          auto it = state.find(r);
          if (it == state.end()) continue;
          for (auto [def, carried] : it->second) use_edges(def, carried, ins.id);
        }
        if (ins.dst >= 0) state[ins.dst] = {{ins.id, false}};
      }
    }
  }

  // Memory edges between operations on the same base.
  if (opts.memory_edges) {
    std::vector<const Instruction*> mem_ops;
    for (int b : body_blocks) {
      for (const auto& ins : k.blocks[b].instrs) {
        if (ins.op == Op::kLoad || ins.op == Op::kStore) mem_ops.push_back(&ins);
      }
    }
    for (const auto* s : mem_ops) {
      if (s->op != Op::kStore) continue;
      for (const auto* l : mem_ops) {
        if (l->op != Op::kLoad || l->array != s->array) continue;
        auto [sb, si] = k.locate(s->id);
        auto [lb, li] = k.locate(l->id);
        int s_loop = cfg.loop_of(sb);
        auto dep = (s_loop >= 0 && s_loop == cfg.loop_of(lb))
                       ? classify_mem_dep(m, k, cfg, s_loop, *s, *l)
                       : MemDepResult{MemDep::kUnknown, 1};
        if (dep.kind == MemDep::kDisjoint) continue;
        bool is_static = dep.kind == MemDep::kStaticDistance;
        int dist = is_static ? dep.distance : 1;
        if (dist >= 1) {
          add_edge(s->id, l->id, DepKind::kMemory, dist, lat.mem_edge, is_static);
        }
        // Same-iteration anti dependence: a load that precedes a may-alias
        // store must read before the store commits.
        bool l_first = (lb == sb) ? li < si : cfg.dominates(lb, sb);
        bool may_alias_same_iter = !is_static || dep.distance == 0;
        if (l_first && may_alias_same_iter) {
          add_edge(l->id, s->id, DepKind::kMemory, 0, node_lat(*l), is_static);
        }
      }
    }
  }

  // Predication edges: instructions execute after the branch controlling
  // their block resolves. This makes control recurrences visible to the
  // recurrence II and delay computations.
  if (opts.control_edges) {
    for (int b : body_blocks) {
      for (int dep : cfg.control_deps(b)) {
        if (!in_body.count(dep)) continue;
        const Instruction& br = k.blocks[dep].terminator();
        if (br.op != Op::kCondBr) continue;
        for (const auto& ins : k.blocks[b].instrs) {
          add_edge(br.id, ins.id, DepKind::kControl, 0, lat.pred_penalty);
        }
      }
    }
  }

  g.out.assign(g.nodes.size(), {});
  g.in.assign(g.nodes.size(), {});
  for (size_t e = 0; e < g.edges.size(); ++e) {
    g.out[g.node_index[g.edges[e].src]].push_back(static_cast<int>(e));
    g.in[g.node_index[g.edges[e].dst]].push_back(static_cast<int>(e));
  }
  return g;
}

DataFlow build_data_flow(const Module& m, const Kernel& k, const CfgAnalysis& cfg) {
  LatencyTable lat;
  DdgOptions opts;
  opts.control_edges = false;
  opts.memory_edges = false;
  Ddg g = build_ddg(m, k, cfg, lat, -1, opts);

  DataFlow flow;
  flow.n = k.num_instrs();
  flow.out.assign(flow.n, {});
  for (const auto& e : g.edges) flow.out[e.src].push_back(e.dst);

  // Conservative value flow through memory and intra-kernel channels.
  std::map<int, std::vector<int>> stores_by_array, loads_by_array;
  std::map<int, std::vector<int>> writes_by_chan, reads_by_chan;
  for (int b = 0; b < cfg.num_blocks(); ++b) {
    for (const auto& ins : k.blocks[b].instrs) {
      if (ins.op == Op::kStore) stores_by_array[ins.array].push_back(ins.id);
      if (ins.op == Op::kLoad) loads_by_array[ins.array].push_back(ins.id);
      if (ins.op == Op::kChWrite || ins.op == Op::kStValWrite)
        writes_by_chan[ins.chan].push_back(ins.id);
      if (ins.op == Op::kChRead) reads_by_chan[ins.chan].push_back(ins.id);
    }
  }
  for (const auto& [array, stores] : stores_by_array) {
    auto it = loads_by_array.find(array);
    if (it == loads_by_array.end()) continue;
    for (int s : stores) {
      for (int l : it->second) flow.out[s].push_back(l);
    }
  }
  for (const auto& [chan, writes] : writes_by_chan) {
    auto it = reads_by_chan.find(chan);
    if (it == reads_by_chan.end()) continue;
    for (int w : writes) {
      for (int r : it->second) flow.out[w].push_back(r);
    }
  }
  return flow;
}

bool DataFlow::reaches(int from, int to) const {
  auto r = reachable_from({from});
  return r[to];
}

std::vector<char> DataFlow::reachable_from(const std::vector<int>& seeds) const {
  std::vector<char> seen(n, 0);
  std::deque<int> work(seeds.begin(), seeds.end());
  for (int s : work) seen[s] = 1;
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    for (int w : out[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        work.push_back(w);
      }
    }
  }
  return seen;
}

namespace {

// Enumerates simple cycles with a bounded DFS; DDG bodies are small.
struct CycleEnum {
  const Ddg& g;
  std::vector<char> on_path;
  std::vector<int> path_edges;
  int start = 0;
  long long visited = 0;
  int best_ii = 1;

  explicit CycleEnum(const Ddg& g) : g(g), on_path(g.nodes.size(), 0) {}

  void dfs(int v) {
    if (++visited > 2000000) {
      throw AnalysisError("recurrence enumeration exceeded its budget");
    }
    for (int e : g.out[v]) {
      const DdgEdge& edge = g.edges[e];
      int w = g.node_index.at(edge.dst);
      if (w < start) continue;
      if (w == start) {
        long long delay = 0, dist = 0;
        for (int pe : path_edges) {
          delay += g.edges[pe].latency;
          dist += g.edges[pe].distance;
        }
        delay += edge.latency;
        dist += edge.distance;
        if (dist <= 0) throw AnalysisError("zero-distance recurrence in DDG");
        int ii = static_cast<int>((delay + dist - 1) / dist);
        best_ii = std::max(best_ii, ii);
        continue;
      }
      if (on_path[w]) continue;
      on_path[w] = 1;
      path_edges.push_back(e);
      dfs(w);
      path_edges.pop_back();
      on_path[w] = 0;
    }
  }
};

}  // namespace

int rec_ii(const Ddg& ddg) {
  CycleEnum ce(ddg);
  for (int s = 0; s < static_cast<int>(ddg.nodes.size()); ++s) {
    ce.start = s;
    ce.on_path.assign(ddg.nodes.size(), 0);
    ce.on_path[s] = 1;
    ce.path_edges.clear();
    ce.dfs(s);
  }
  return ce.best_ii;
}

namespace {

std::vector<int> topo_order_dist0(const Ddg& g) {
  size_t n = g.nodes.size();
  std::vector<int> indeg(n, 0);
  for (const auto& e : g.edges) {
    if (e.distance == 0) indeg[g.node_index.at(e.dst)]++;
  }
  std::vector<int> order;
  std::deque<int> ready;
  for (size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
  }
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (int e : g.out[v]) {
      if (g.edges[e].distance != 0) continue;
      int w = g.node_index.at(g.edges[e].dst);
      if (--indeg[w] == 0) ready.push_back(w);
    }
  }
  if (order.size() != n) throw AnalysisError("combinational cycle in iteration schedule");
  return order;
}

}  // namespace

int body_latency(const Kernel& k, const Ddg& ddg, const LatencyTable& lat) {
  auto order = topo_order_dist0(ddg);
  std::vector<int> asap(ddg.nodes.size(), 0);
  int makespan = 0;
  for (int v : order) {
    for (int e : ddg.out[v]) {
      const auto& edge = ddg.edges[e];
      if (edge.distance != 0) continue;
      int w = ddg.node_index.at(edge.dst);
      asap[w] = std::max(asap[w], asap[v] + edge.latency);
    }
    makespan = std::max(makespan, asap[v] + lat.of(k.instr(ddg.nodes[v])));
  }
  return makespan;
}

int longest_path(const Ddg& ddg, const std::set<int>& from, const std::set<int>& to) {
  auto order = topo_order_dist0(ddg);
  constexpr int kUnreached = -1;
  std::vector<int> dp(ddg.nodes.size(), kUnreached);
  for (int id : from) {
    int idx = ddg.index_of(id);
    if (idx >= 0) dp[idx] = 0;
  }
  for (int v : order) {
    if (dp[v] == kUnreached) continue;
    for (int e : ddg.out[v]) {
      const auto& edge = ddg.edges[e];
      if (edge.distance != 0) continue;
      int w = ddg.node_index.at(edge.dst);
      dp[w] = std::max(dp[w], dp[v] + edge.latency);
    }
  }
  int best = kUnreached;
  for (int id : to) {
    int idx = ddg.index_of(id);
    if (idx >= 0) best = std::max(best, dp[idx]);
  }
  return best;
}

}  // namespace lsqforge::ir
