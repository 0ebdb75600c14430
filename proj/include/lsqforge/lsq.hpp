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

#ifndef LSQFORGE_LSQ_HPP_
#define LSQFORGE_LSQ_HPP_

#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "lsqforge/channel.hpp"
#include "lsqforge/memory.hpp"
#include "lsqforge/report.hpp"

namespace lsqforge::lsq {

using sim::Channel;
using sim::Memory;
using sim::Token;
using sim::u64;
using sim::Word;

enum class Event { kAcceptLd, kAcceptSt, kAcceptStVal, kWait, kForward, kRead, kWrite, kInvalidate };
const char* event_name(Event e);

// cycle, event, port (-1 for the store pipeline), address, tag.
using TraceFn = std::function<void(u64, Event, int, Word, u64)>;

// Single-comparison mutations used by the oracle kill-rate suite. Production
// configurations always run kNone.
enum class Mutation {
  kNone,
  kTagCheckFlipped,     // wait if ld.tag <= latest accepted store tag
  kDisambiguateTagGt,   // conflict only when ld.tag > st.tag (misses equality)
  kDisambiguateIgnoreAddr,  // conflict on tag alone
  kForwardOldest,       // forward the oldest matching commit
  kSkipAllocScan,       // never check the store allocation queue
};

struct LsqConfig {
  int st_alloc_queue_size = 8;
  int ld_alloc_queue_size = 8;
  int st_commit_queue_size = 2;
  int num_load_ports = 1;
  int disamb_depth = 2;  // pipeline stages for the load checks, 1..4
  bool check_invariants = true;
  Mutation mutation = Mutation::kNone;
};

// One static protected load: allocations arrive on alloc_in, values leave on
// value_out in request order.
struct LoadSeq {
  Channel* alloc_in = nullptr;
  Channel* value_out = nullptr;
};

// One static protected store: allocations on alloc_in, values on value_in.
struct StoreSeq {
  Channel* alloc_in = nullptr;
  Channel* value_in = nullptr;
};

// The shift-register load-store queue protecting one base address.
//
// Per cycle: store execution, then acceptance, then the load pipeline, then
// commit retirement and value delivery. A load at its queue head first checks
// that all program-earlier store allocations have arrived (tag check), then
// scans the store allocation queue for an (address, tag) conflict; only then
// may it check the commit queue, forwarding the youngest matching value or
// reading memory.
class Lsq {
 public:
  Lsq(LsqConfig cfg, std::vector<LoadSeq> loads, std::vector<StoreSeq> stores, Memory* mem,
      TraceFn trace = nullptr);

  void tick(u64 now);
  bool idle() const;
  u64 activity() const { return activity_; }

  const sim::LsqCounts& counts() const { return counts_; }
  const sim::StallStats& stalls() const { return stalls_; }
  u64 latest_store_tag() const { return latest_store_tag_; }

  // Test hook: direct state inspection for the unit suite.
  size_t st_alloc_occupancy() const { return st_allocs_.size(); }
  size_t commit_occupancy() const { return commits_.size(); }

 private:
  struct LoadEntry {
    Word addr;
    u64 tag;
    u64 reqid;
    int seq;  // index into loads_
  };
  struct StoreEntry {
    Word addr;
    u64 tag;
  };
  struct StoreValue {
    Word value;
    bool valid;
  };
  struct CommitEntry {
    Word addr;
    Word value;
    int remaining;
    u64 shadow_tag;  // debug-only program-order check; the datapath never reads it
  };
  struct Delivery {
    bool ready;
    Word value;
    u64 reqid;
    Word addr;
    u64 ticket;  // memory read ticket when !ready
  };

  void do_store_execute(u64 now);
  void do_accept(u64 now);
  void do_load_pipeline(u64 now);
  void do_delivery(u64 now);
  void do_commit_countdown(u64 now);
  void do_memory_completions(u64 now);

  bool alloc_conflict(const LoadEntry& ld) const;
  bool tag_ready(const LoadEntry& ld) const;
  void serve(u64 now, const LoadEntry& ld);
  void assert_eq1_safety(const LoadEntry& ld) const;

  LsqConfig cfg_;
  std::vector<LoadSeq> loads_;
  std::vector<StoreSeq> stores_;
  Memory* mem_;
  TraceFn trace_;

  std::vector<int> seq_port_;                         // load seq -> port
  std::vector<std::deque<LoadEntry>> port_queue_;     // per port
  std::vector<std::vector<std::optional<LoadEntry>>> stage_;  // per port, depth entries
  std::deque<StoreEntry> st_allocs_;
  std::deque<StoreValue> st_values_;
  std::deque<CommitEntry> commits_;
  std::vector<std::deque<Delivery>> delivery_;        // per load seq, serve order
  u64 latest_store_tag_ = 0;
  u64 next_svid_ = 0;
  u64 next_ticket_ = 1;
  u64 executed_stores_ = 0;

  sim::LsqCounts counts_;
  sim::StallStats stalls_;
  u64 activity_ = 0;
};

}  // namespace lsqforge::lsq

#endif  // LSQFORGE_LSQ_HPP_
