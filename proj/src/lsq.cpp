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

#include "lsqforge/lsq.hpp"

#include <algorithm>
#include <stdexcept>

namespace lsqforge::lsq {

const char* event_name(Event e) {
  switch (e) {
    case Event::kAcceptLd: return "ACCEPT";
    case Event::kAcceptSt: return "ACCEPT_ST";
    case Event::kAcceptStVal: return "ACCEPT_STVAL";
    case Event::kWait: return "WAIT";
    case Event::kForward: return "FWD";
    case Event::kRead: return "READ";
    case Event::kWrite: return "WRITE";
    case Event::kInvalidate: return "INVALIDATE";
  }
  return "?";
}

Lsq::Lsq(LsqConfig cfg, std::vector<LoadSeq> loads, std::vector<StoreSeq> stores, Memory* mem,
         TraceFn trace)
    : cfg_(cfg), loads_(std::move(loads)), stores_(std::move(stores)), mem_(mem),
      trace_(std::move(trace)) {
  if (cfg_.disamb_depth < 1 || cfg_.disamb_depth > 4) {
    throw std::invalid_argument("disambiguation depth must be in 1..4");
  }
  int ports = std::max(1, cfg_.num_load_ports);
  cfg_.num_load_ports = ports;
  seq_port_.resize(loads_.size());
  for (size_t s = 0; s < loads_.size(); ++s) seq_port_[s] = static_cast<int>(s % ports);
  port_queue_.resize(ports);
  stage_.assign(ports, std::vector<std::optional<LoadEntry>>(cfg_.disamb_depth));
  delivery_.resize(loads_.size());
}

void Lsq::tick(u64 now) {
  do_memory_completions(now);
  do_store_execute(now);
  do_accept(now);
  do_load_pipeline(now);
  do_delivery(now);
  do_commit_countdown(now);
}

bool Lsq::idle() const {
  for (const auto& q : port_queue_) {
    if (!q.empty()) return false;
  }
  for (const auto& stages : stage_) {
    for (const auto& s : stages) {
      if (s.has_value()) return false;
    }
  }
  for (const auto& d : delivery_) {
    if (!d.empty()) return false;
  }
  return st_allocs_.empty() && st_values_.empty() && commits_.empty() && mem_->idle();
}

void Lsq::do_memory_completions(u64 now) {
  auto done = mem_->completions(now);
  if (!done.empty()) activity_ += done.size();
  for (const auto& c : done) {
    for (auto& q : delivery_) {
      for (auto& d : q) {
        if (!d.ready && d.ticket == c.ticket) {
          d.ready = true;
          d.value = c.value;
        }
      }
    }
  }
}

void Lsq::do_store_execute(u64 now) {
  // One store per cycle leaves the allocation queue, valid or not. Values
  // pair with allocations positionally; both arrive in program order.
  if (st_allocs_.empty() || st_values_.empty()) return;
  const StoreEntry st = st_allocs_.front();
  const StoreValue sv = st_values_.front();
  if (!sv.valid) {
    st_allocs_.pop_front();
    st_values_.pop_front();
    ++executed_stores_;
    ++counts_.invalidations;
    ++activity_;
    if (trace_) trace_(now, Event::kInvalidate, -1, st.addr, st.tag);
    return;
  }
  if (static_cast<int>(commits_.size()) >= cfg_.st_commit_queue_size) {
    ++stalls_.queue_full;
    return;
  }
  int hold = mem_->write(st.addr, sv.value);
  commits_.push_back({st.addr, sv.value, hold, st.tag});
  counts_.max_commit_occupancy = std::max(counts_.max_commit_occupancy,
                                          static_cast<u64>(commits_.size()));
  st_allocs_.pop_front();
  st_values_.pop_front();
  ++executed_stores_;
  ++counts_.memory_writes;
  ++activity_;
  if (trace_) trace_(now, Event::kWrite, -1, st.addr, st.tag);
}

void Lsq::do_accept(u64 now) {
  // Load allocations: one per port per cycle; when several sequences share a
  // port, the earliest request in program order wins.
  for (int p = 0; p < cfg_.num_load_ports; ++p) {
    if (static_cast<int>(port_queue_[p].size()) >= cfg_.ld_alloc_queue_size) {
      bool pending = false;
      for (size_t s = 0; s < loads_.size(); ++s) {
        if (seq_port_[s] == p && loads_[s].alloc_in->visible_at(0, now)) pending = true;
      }
      if (pending) ++stalls_.queue_full;
      continue;
    }
    int best_seq = -1;
    u64 best_reqid = 0;
    for (size_t s = 0; s < loads_.size(); ++s) {
      if (seq_port_[s] != p || !loads_[s].alloc_in->visible_at(0, now)) continue;
      u64 reqid = static_cast<u64>(loads_[s].alloc_in->at(0).c);
      if (best_seq < 0 || reqid < best_reqid) {
        best_seq = static_cast<int>(s);
        best_reqid = reqid;
      }
    }
    if (best_seq < 0) continue;
    Token t = loads_[best_seq].alloc_in->pop();
    port_queue_[p].push_back(
        {t.a, static_cast<u64>(t.b), static_cast<u64>(t.c), best_seq});
    ++counts_.ld_allocs_accepted;
    ++activity_;
    if (trace_) trace_(now, Event::kAcceptLd, p, t.a, static_cast<u64>(t.b));
  }

  // Store allocations: strictly in tag order onto the single store pipeline.
  for (size_t s = 0; s < stores_.size(); ++s) {
    if (!stores_[s].alloc_in->visible_at(0, now)) continue;
    u64 tag = static_cast<u64>(stores_[s].alloc_in->at(0).b);
    if (tag != latest_store_tag_ + 1) continue;
    if (static_cast<int>(st_allocs_.size()) >= cfg_.st_alloc_queue_size) {
      ++stalls_.queue_full;
      break;
    }
    Token t = stores_[s].alloc_in->pop();
    st_allocs_.push_back({t.a, tag});
    latest_store_tag_ = tag;
    counts_.max_st_alloc_occupancy = std::max(counts_.max_st_alloc_occupancy,
                                              static_cast<u64>(st_allocs_.size()));
    ++counts_.st_allocs_accepted;
    ++activity_;
    if (trace_) trace_(now, Event::kAcceptSt, -1, t.a, tag);
    break;  // one per cycle
  }

  // Store values: in svid order, bounded so pairing state cannot grow without
  // backpressure.
  int value_cap = cfg_.st_alloc_queue_size + cfg_.st_commit_queue_size;
  for (size_t s = 0; s < stores_.size(); ++s) {
    if (!stores_[s].value_in->visible_at(0, now)) continue;
    u64 svid = static_cast<u64>(stores_[s].value_in->at(0).c);
    if (svid != next_svid_) continue;
    if (static_cast<int>(st_values_.size()) >= value_cap) {
      ++stalls_.queue_full;
      break;
    }
    Token t = stores_[s].value_in->pop();
    st_values_.push_back({t.a, t.b != 0});
    ++next_svid_;
    ++activity_;
    if (trace_) trace_(now, Event::kAcceptStVal, -1, t.a, svid);
    break;  // one per cycle
  }
}

bool Lsq::tag_ready(const LoadEntry& ld) const {
  if (cfg_.mutation == Mutation::kTagCheckFlipped) return ld.tag > latest_store_tag_;
  return ld.tag <= latest_store_tag_;
}

bool Lsq::alloc_conflict(const LoadEntry& ld) const {
  if (cfg_.mutation == Mutation::kSkipAllocScan) return false;
  for (const auto& st : st_allocs_) {
    bool addr_hit = cfg_.mutation == Mutation::kDisambiguateIgnoreAddr || st.addr == ld.addr;
    bool tag_hit = cfg_.mutation == Mutation::kDisambiguateTagGt ? ld.tag > st.tag
                                                                 : ld.tag >= st.tag;
    if (addr_hit && tag_hit) return true;
  }
  return false;
}

void Lsq::assert_eq1_safety(const LoadEntry& ld) const {
  // Re-derived from scratch at serve time: no resident store allocation may
  // satisfy both conditions of the disambiguation equation, and all
  // program-earlier stores must have allocated.
  if (ld.tag > latest_store_tag_) {
    throw std::logic_error("LSQ safety: load served before all prior store allocations arrived");
  }
  for (const auto& st : st_allocs_) {
    if (st.addr == ld.addr && ld.tag >= st.tag) {
      throw std::logic_error("LSQ safety: load served past a conflicting store allocation");
    }
  }
  for (const auto& c : commits_) {
    if (c.shadow_tag > ld.tag) {
      throw std::logic_error("LSQ safety: commit queue holds a store younger than a served load");
    }
  }
}

void Lsq::serve(u64 now, const LoadEntry& ld) {
  if (cfg_.check_invariants && cfg_.mutation == Mutation::kNone) assert_eq1_safety(ld);
  ++counts_.loads_served;
  // Youngest-first scan of the commit queue (back of the deque is youngest).
  const CommitEntry* hit = nullptr;
  if (cfg_.mutation == Mutation::kForwardOldest) {
    for (auto it = commits_.begin(); it != commits_.end(); ++it) {
      if (it->addr == ld.addr) {
        hit = &*it;
        break;
      }
    }
  } else {
    for (auto it = commits_.rbegin(); it != commits_.rend(); ++it) {
      if (it->addr == ld.addr) {
        hit = &*it;
        break;
      }
    }
  }
  if (hit != nullptr) {
    delivery_[ld.seq].push_back({true, hit->value, ld.reqid, ld.addr, 0});
    ++counts_.forwards;
    ++activity_;
    if (trace_) trace_(now, Event::kForward, seq_port_[ld.seq], ld.addr, ld.tag);
    return;
  }
  u64 ticket = next_ticket_++;
  delivery_[ld.seq].push_back({false, 0, ld.reqid, ld.addr, ticket});
  mem_->issue_read(now, ld.addr, ticket);
  ++counts_.memory_reads;
  ++activity_;
  if (trace_) trace_(now, Event::kRead, seq_port_[ld.seq], ld.addr, ld.tag);
}

void Lsq::do_load_pipeline(u64 now) {
  int depth = cfg_.disamb_depth;
  for (int p = 0; p < cfg_.num_load_ports; ++p) {
    auto& stages = stage_[p];
    // Final stage: commit check, then forward or read.
    if (stages[depth - 1].has_value()) {
      const LoadEntry& ld = *stages[depth - 1];
      if (delivery_[ld.seq].size() < static_cast<size_t>(loads_[ld.seq].value_out->capacity())) {
        serve(now, ld);
        stages[depth - 1].reset();
      } else {
        ++stalls_.channel_full;
      }
    }
    // Shift intermediate stages toward the exit.
    for (int s = depth - 2; s >= 0; --s) {
      if (stages[s].has_value() && !stages[s + 1].has_value()) {
        stages[s + 1] = stages[s];
        stages[s].reset();
      }
    }
    // Head of the allocation queue: tag check plus allocation-queue scan.
    if (!port_queue_[p].empty() && !stages[0].has_value()) {
      const LoadEntry& ld = port_queue_[p].front();
      if (!tag_ready(ld) || alloc_conflict(ld)) {
        ++stalls_.hazard_wait;
        if (trace_) trace_(now, Event::kWait, p, ld.addr, ld.tag);
      } else if (depth == 1) {
        // Single-stage configuration: all checks and the serve in one cycle.
        if (delivery_[ld.seq].size() <
            static_cast<size_t>(loads_[ld.seq].value_out->capacity())) {
          serve(now, ld);
          port_queue_[p].pop_front();
          ++activity_;
        } else {
          ++stalls_.channel_full;
        }
      } else {
        stages[0] = ld;
        port_queue_[p].pop_front();
        ++activity_;
      }
    }
  }
}

void Lsq::do_delivery(u64 now) {
  for (size_t s = 0; s < loads_.size(); ++s) {
    auto& q = delivery_[s];
    while (!q.empty() && q.front().ready && loads_[s].value_out->can_push(now)) {
      const Delivery& d = q.front();
      loads_[s].value_out->push(now, {d.value, static_cast<Word>(d.reqid), d.addr});
      q.pop_front();
      ++activity_;
    }
    if (!q.empty() && q.front().ready && !loads_[s].value_out->can_push(now)) {
      ++stalls_.channel_full;
    }
  }
  if (mem_->outstanding() > 0) ++stalls_.memory_wait;
}

void Lsq::do_commit_countdown(u64 now) {
  (void)now;
  while (!commits_.empty() && commits_.front().remaining <= 1) {
    commits_.pop_front();
    ++activity_;
  }
  for (auto& c : commits_) --c.remaining;
}

}  // namespace lsqforge::lsq
