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

#ifndef LSQFORGE_ENGINE_HPP_
#define LSQFORGE_ENGINE_HPP_

#include <map>
#include <set>

#include "lsqforge/analysis.hpp"
#include "lsqforge/channel.hpp"
#include "lsqforge/ddg.hpp"
#include "lsqforge/interp.hpp"
#include "lsqforge/report.hpp"

namespace lsqforge::sim {

struct EngineConfig {
  int target_ii = 1;
  ir::LatencyTable lat;
  u64 step_limit = 200'000'000;
};

struct EngineHooks {
  std::map<int, int> lsq_value_reads;   // channel -> base, LSQ load values consumed here
  std::map<int, int> lsq_store_values;  // channel -> base, store values produced here
  std::set<int> protected_arrays;       // direct access is a transform bug
};

// Executes one kernel as a pipelined in-order-issue datapath. Values follow
// strict sequential semantics; each dynamic instruction additionally gets a
// start/finish cycle constrained by operand readiness, the loop's initiation
// interval, branch resolution, per-channel ordering and capacity, and
// same-address ordering on private arrays. The interpretation cursor blocks
// only on channel reads whose token has not arrived and on channel-write
// run-ahead bounds, so iterations overlap exactly as far as data allows.
class Engine {
 public:
  Engine(const ir::Module& m, const ir::Kernel& k, EngineConfig cfg, const ir::RunInputs& inputs,
         std::vector<Channel>* chans, EngineHooks hooks);

  void tick(u64 now);
  bool done() const;
  u64 activity() const { return activity_; }
  u64 max_event_time() const { return max_event_; }

  const std::vector<std::vector<Word>>& arrays() const { return arrays_; }
  const std::map<int, std::vector<u64>>& issue_times() const { return issue_times_; }
  u64 iterations_issued() const { return iterations_issued_; }
  const StallStats& stalls() const { return stalls_; }
  std::vector<LoadRecord>& load_records() { return load_records_; }
  const ir::Kernel& kernel() const { return k_; }

 private:
  struct PendingWrite {
    Token token;
    u64 earliest;
  };
  struct ChanState {
    u64 peeked = 0;                     // tokens the cursor has consumed
    std::deque<u64> scheduled_pops;     // dequeue times for peeked tokens
    std::deque<PendingWrite> pending;   // writes not yet in the channel
    u64 last_op_start = 0;
    bool op_seen = false;
    bool pushed_this_cycle = false;
  };
  struct LoopCtx {
    int loop = -1;
    u64 issue_base = 0;
    bool pending_anchor = false;
    u64 entry_time = 0;
  };

  void flush(u64 now);
  void advance_cursor(u64 now);
  bool exec_instr(u64 now, const ir::Instruction& ins);
  void transition(u64 now, int target, u64 resolve_time, bool conditional);
  u64 chan_order_floor(ChanState& cs) const;
  u64 base_floor(u64 now) const;
  void note_event(u64 t) { max_event_ = std::max(max_event_, t); }
  void fill_anchors(u64 t);

  const ir::Module& m_;
  const ir::Kernel& k_;
  EngineConfig cfg_;
  std::vector<Channel>* chans_;
  EngineHooks hooks_;
  ir::CfgAnalysis cfg_an_;
  std::vector<char> data_dep_exit_;  // per loop

  std::vector<Word> regs_;
  std::vector<u64> reg_time_;
  std::vector<std::vector<Word>> arrays_;
  std::vector<std::map<Word, std::pair<u64, u64>>> addr_times_;  // {store_finish, access_finish}

  int cur_block_ = 0;
  size_t cur_instr_ = 0;
  bool cursor_done_ = false;
  u64 block_entry_ = 0;
  std::vector<LoopCtx> loop_stack_;
  std::map<int, ChanState> chan_state_;
  std::map<int, u64> reqid_;  // per base
  std::map<int, u64> svid_;
  std::map<int, u64> last_lsq_read_start_;  // per base, §III-style value ordering

  std::map<int, std::vector<u64>> issue_times_;  // header block -> anchor times
  u64 iterations_issued_ = 0;
  std::vector<LoadRecord> load_records_;
  StallStats stalls_;
  u64 steps_ = 0;
  u64 activity_ = 0;
  u64 max_event_ = 0;
};

}  // namespace lsqforge::sim

#endif  // LSQFORGE_ENGINE_HPP_
