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

#include "lsqforge/engine.hpp"

#include <algorithm>

namespace lsqforge::sim {

using ir::Instruction;
using ir::Op;

namespace {

Word eval_binop(Op op, Word a, Word b, int id) {
  auto ua = static_cast<std::uint64_t>(a);
  auto ub = static_cast<std::uint64_t>(b);
  switch (op) {
    case Op::kAdd: return static_cast<Word>(ua + ub);
    case Op::kSub: return static_cast<Word>(ua - ub);
    case Op::kMul: return static_cast<Word>(ua * ub);
    case Op::kDiv:
      if (b == 0) throw ir::TrapError(id, "division by zero");
      return a / b;
    case Op::kMod:
      if (b == 0) throw ir::TrapError(id, "modulo by zero");
      return a % b;
    case Op::kAnd: return static_cast<Word>(ua & ub);
    case Op::kOr: return static_cast<Word>(ua | ub);
    case Op::kXor: return static_cast<Word>(ua ^ ub);
    case Op::kShl: return static_cast<Word>(ua << (ub & 63));
    case Op::kShr: return static_cast<Word>(ua >> (ub & 63));
    case Op::kMin: return a < b ? a : b;
    case Op::kMax: return a > b ? a : b;
    case Op::kEq: return a == b;
    case Op::kNe: return a != b;
    case Op::kLt: return a < b;
    case Op::kLe: return a <= b;
    case Op::kGt: return a > b;
    case Op::kGe: return a >= b;
    default: throw ir::TrapError(id, "not a binary op");
  }
}

}  // namespace

Engine::Engine(const ir::Module& m, const ir::Kernel& k, EngineConfig cfg,
               const ir::RunInputs& inputs, std::vector<Channel>* chans, EngineHooks hooks)
    : m_(m), k_(k), cfg_(cfg), chans_(chans), hooks_(std::move(hooks)), cfg_an_(k) {
  regs_.assign(k_.regs.size(), 0);
  reg_time_.assign(k_.regs.size(), 0);
  for (int r : k_.inputs) {
    auto it = inputs.scalars.find(k_.regs[r]);
    if (it != inputs.scalars.end()) regs_[r] = it->second;
  }
  arrays_ = ir::init_arrays(m_, inputs);
  addr_times_.resize(arrays_.size());

  // A loop whose exit condition depends on a load or channel read inside its
  // own body cannot issue the next iteration before that condition resolves.
  data_dep_exit_.assign(cfg_an_.loops().size(), 0);
  for (size_t li = 0; li < cfg_an_.loops().size(); ++li) {
    ir::DdgOptions opts;
    opts.control_edges = false;
    ir::Ddg ddg = ir::build_ddg(m_, k_, cfg_an_, cfg_.lat, static_cast<int>(li), opts);
    std::set<int> sources, sinks;
    for (int id : ddg.nodes) {
      const Instruction& ins = k_.instr(id);
      if (ins.op == Op::kLoad || ins.op == Op::kChRead) sources.insert(id);
    }
    for (int latch : cfg_an_.loops()[li].latches) {
      const Instruction& t = k_.blocks[latch].terminator();
      if (t.op == Op::kCondBr) sinks.insert(t.id);
    }
    if (!sources.empty() && !sinks.empty() && ir::longest_path(ddg, sources, sinks) >= 0) {
      data_dep_exit_[li] = 1;
    }
  }
}

bool Engine::done() const {
  if (!cursor_done_) return false;
  for (const auto& [chan, cs] : chan_state_) {
    if (!cs.pending.empty() || !cs.scheduled_pops.empty()) return false;
  }
  return true;
}

void Engine::flush(u64 now) {
  for (auto& [chan, cs] : chan_state_) {
    Channel& c = (*chans_)[chan];
    while (!cs.scheduled_pops.empty() && cs.scheduled_pops.front() <= now) {
      c.pop();
      cs.scheduled_pops.pop_front();
      ++activity_;
    }
    // At most one transfer per channel per cycle.
    if (!cs.pending.empty() && cs.pending.front().earliest <= now && !cs.pushed_this_cycle) {
      if (!c.can_push(now)) {
        ++stalls_.channel_full;
      } else {
        c.push(now, cs.pending.front().token);
        cs.pending.pop_front();
        cs.pushed_this_cycle = true;
        note_event(now);
        ++activity_;
      }
    }
  }
}

void Engine::tick(u64 now) {
  for (auto& [chan, cs] : chan_state_) cs.pushed_this_cycle = false;
  flush(now);
  advance_cursor(now);
  flush(now);
}

u64 Engine::chan_order_floor(ChanState& cs) const {
  return cs.op_seen ? cs.last_op_start + 1 : 0;
}

u64 Engine::base_floor(u64 now) const {
  u64 t = now;
  if (!loop_stack_.empty()) t = std::max(t, loop_stack_.back().issue_base);
  return std::max(t, block_entry_);
}

void Engine::fill_anchors(u64 t) {
  for (auto& ctx : loop_stack_) {
    if (ctx.pending_anchor) {
      issue_times_[cfg_an_.loops()[ctx.loop].header].push_back(t);
      ctx.pending_anchor = false;
    }
  }
}

void Engine::transition(u64 now, int target, u64 resolve_time, bool conditional) {
  u64 entry = conditional ? resolve_time + static_cast<u64>(cfg_.lat.pred_penalty)
                          : resolve_time;
  bool back_edge = cfg_an_.is_back_edge(cur_block_, target);

  // Leave loops that do not contain the target (flushing unfilled anchors).
  auto leave_until = [&](int keep_loop) {
    while (!loop_stack_.empty() && loop_stack_.back().loop != keep_loop) {
      if (loop_stack_.back().pending_anchor) {
        issue_times_[cfg_an_.loops()[loop_stack_.back().loop].header].push_back(
            loop_stack_.back().entry_time);
      }
      loop_stack_.pop_back();
    }
  };

  if (back_edge) {
    int loop = cfg_an_.loop_of(target);
    for (size_t i = 0; i < cfg_an_.loops().size(); ++i) {
      if (cfg_an_.loops()[i].header == target && cfg_an_.loops()[i].contains(cur_block_)) {
        loop = static_cast<int>(i);
      }
    }
    leave_until(loop);
    if (loop_stack_.empty()) loop_stack_.push_back({loop, entry, false, entry});
    LoopCtx& ctx = loop_stack_.back();
    u64 next = ctx.issue_base + static_cast<u64>(cfg_.target_ii);
    if (data_dep_exit_[ctx.loop]) next = std::max(next, entry);
    ctx.issue_base = next;
    if (ctx.pending_anchor) {
      issue_times_[cfg_an_.loops()[ctx.loop].header].push_back(ctx.entry_time);
    }
    ctx.pending_anchor = true;
    ctx.entry_time = next;
    ++iterations_issued_;
    block_entry_ = next;
  } else {
    // Pop loops we are leaving.
    while (!loop_stack_.empty() &&
           !cfg_an_.loops()[loop_stack_.back().loop].contains(target)) {
      if (loop_stack_.back().pending_anchor) {
        issue_times_[cfg_an_.loops()[loop_stack_.back().loop].header].push_back(
            loop_stack_.back().entry_time);
      }
      loop_stack_.pop_back();
    }
    block_entry_ = std::max(entry, block_entry_);
    // Entering a loop header from outside starts a fresh iteration sequence.
    for (size_t i = 0; i < cfg_an_.loops().size(); ++i) {
      if (cfg_an_.loops()[i].header == target) {
        loop_stack_.push_back({static_cast<int>(i), block_entry_, true, block_entry_});
        ++iterations_issued_;
      }
    }
  }
  cur_block_ = target;
  cur_instr_ = 0;
}

// Returns false when the cursor must block until a later cycle.
bool Engine::exec_instr(u64 now, const Instruction& ins) {
  auto val = [&](int i) { return regs_[ins.args[i]]; };
  auto rt = [&](int i) { return ins.args[i] >= 0 ? reg_time_[ins.args[i]] : 0; };
  u64 floor = base_floor(now);

  switch (ins.op) {
    case Op::kConst: {
      regs_[ins.dst] = ins.imm;
      reg_time_[ins.dst] = floor;
      return true;
    }
    case Op::kLoad:
    case Op::kStore: {
      if (hooks_.protected_arrays.count(ins.array)) {
        throw std::logic_error("direct access to protected base " + m_.arrays[ins.array].name);
      }
      Word addr = val(0);
      auto& arr = arrays_[ins.array];
      if (addr < 0 || addr >= static_cast<Word>(arr.size())) {
        throw ir::TrapError(ins.id, "private access out of bounds: " +
                                        m_.arrays[ins.array].name + "[" + std::to_string(addr) +
                                        "]");
      }
      auto& at = addr_times_[ins.array][addr];
      if (ins.op == Op::kLoad) {
        u64 start = std::max({floor, rt(0), at.first});
        u64 finish = start + static_cast<u64>(cfg_.lat.load);
        regs_[ins.dst] = arr[static_cast<size_t>(addr)];
        reg_time_[ins.dst] = finish;
        at.second = std::max(at.second, finish);
        note_event(finish);
      } else {
        u64 start = std::max({floor, rt(0), rt(1), at.first, at.second});
        u64 finish = start + static_cast<u64>(cfg_.lat.store);
        arr[static_cast<size_t>(addr)] = val(1);
        at.first = std::max(at.first, finish);
        at.second = std::max(at.second, finish);
        note_event(finish);
      }
      return true;
    }
    case Op::kChRead: {
      ChanState& cs = chan_state_[ins.chan];
      Channel& c = (*chans_)[ins.chan];
      size_t next_index = static_cast<size_t>(cs.peeked - c.pops());
      if (!c.visible_at(next_index, now)) return false;  // token not here yet
      Token t = c.at(next_index);
      u64 start = std::max({now, floor, chan_order_floor(cs)});
      cs.peeked++;
      cs.scheduled_pops.push_back(start);
      cs.last_op_start = start;
      cs.op_seen = true;
      regs_[ins.dst] = t.a;
      reg_time_[ins.dst] = start;
      auto lv = hooks_.lsq_value_reads.find(ins.chan);
      if (lv != hooks_.lsq_value_reads.end()) {
        int base = lv->second;
        auto& last = last_lsq_read_start_[base];
        last = std::max(last, start);
        load_records_.push_back(
            {base, static_cast<u64>(t.b), t.c, t.a, ins.discard});
      }
      fill_anchors(start);
      note_event(start);
      return true;
    }
    case Op::kChWrite:
    case Op::kStValWrite:
    case Op::kLdAlloc:
    case Op::kStAlloc: {
      ChanState& cs = chan_state_[ins.chan];
      Channel& c = (*chans_)[ins.chan];
      if (cs.pending.size() >= static_cast<size_t>(c.capacity())) {
        ++stalls_.channel_full;
        return false;  // run-ahead bound: producer-side slots exhausted
      }
      Token t;
      u64 data_ready = 0;
      switch (ins.op) {
        case Op::kChWrite:
          t = {val(0), 0, 0};
          data_ready = rt(0);
          break;
        case Op::kStValWrite: {
          int base = hooks_.lsq_store_values.count(ins.chan)
                         ? hooks_.lsq_store_values.at(ins.chan)
                         : -1;
          u64 sv = base >= 0 ? svid_[base]++ : 0;
          t = {val(0), val(1), static_cast<Word>(sv)};
          data_ready = std::max(rt(0), rt(1));
          if (base >= 0) {
            // Store values may not overtake the consumption of any earlier
            // load value on the same base; this keeps the commit queue free
            // of stores that follow an unserved load in program order.
            data_ready = std::max(data_ready, last_lsq_read_start_[base]);
          }
          break;
        }
        case Op::kLdAlloc:
          t = {val(0), val(1), static_cast<Word>(reqid_[ins.array]++)};
          data_ready = std::max(rt(0), rt(1));
          break;
        default:  // kStAlloc
          t = {val(0), val(1), 0};
          data_ready = std::max(rt(0), rt(1));
          break;
      }
      u64 start = std::max({now, floor, data_ready, chan_order_floor(cs)});
      cs.pending.push_back({t, start});
      cs.last_op_start = start;
      cs.op_seen = true;
      fill_anchors(start);
      note_event(start);
      return true;
    }
    case Op::kBr: {
      transition(now, ins.succ0, std::max(now, block_entry_), false);
      return true;
    }
    case Op::kCondBr: {
      u64 resolve = std::max({now, base_floor(now), rt(0)});
      int target = val(0) ? ins.succ0 : ins.succ1;
      note_event(resolve);
      transition(now, target, resolve, true);
      return true;
    }
    case Op::kRet: {
      cursor_done_ = true;
      while (!loop_stack_.empty()) {
        if (loop_stack_.back().pending_anchor) {
          issue_times_[cfg_an_.loops()[loop_stack_.back().loop].header].push_back(
              loop_stack_.back().entry_time);
        }
        loop_stack_.pop_back();
      }
      return true;
    }
    case Op::kSelect: {
      regs_[ins.dst] = val(0) ? val(1) : val(2);
      u64 start = std::max({floor, rt(0), rt(1), rt(2)});
      reg_time_[ins.dst] = start + static_cast<u64>(cfg_.lat.select);
      note_event(reg_time_[ins.dst]);
      return true;
    }
    default: {
      regs_[ins.dst] = eval_binop(ins.op, val(0), val(1), ins.id);
      u64 start = std::max({floor, rt(0), rt(1)});
      reg_time_[ins.dst] = start + static_cast<u64>(cfg_.lat.of(ins));
      note_event(reg_time_[ins.dst]);
      return true;
    }
  }
}

void Engine::advance_cursor(u64 now) {
  while (!cursor_done_) {
    if (++steps_ > cfg_.step_limit) {
      throw ir::TrapError(-1, "engine step limit exceeded in kernel " + k_.name);
    }
    const Instruction& ins = k_.blocks[cur_block_].instrs[cur_instr_];
    bool is_branch = ir::op_is_terminator(ins.op);
    if (!exec_instr(now, ins)) {
      --steps_;
      return;  // blocked; retry next cycle
    }
    ++activity_;
    if (!is_branch) ++cur_instr_;
    // Branch transitions reset the cursor themselves.
  }
}

}  // namespace lsqforge::sim
