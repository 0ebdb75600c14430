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

#ifndef LSQFORGE_REPORT_HPP_
#define LSQFORGE_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lsqforge/ir.hpp"

namespace lsqforge::sim {

using ir::Word;
using u64 = std::uint64_t;

struct LoopStats {
  std::string kernel;
  std::string header;
  u64 iterations = 0;
  // Achieved II over the middle 80% of iterations, as an exact rational.
  u64 ii_num = 0;
  u64 ii_den = 1;

  double ii() const { return ii_den == 0 ? 0.0 : static_cast<double>(ii_num) / ii_den; }
};

struct StallStats {
  u64 hazard_wait = 0;    // load head cycles spent in Wait
  u64 queue_full = 0;     // allocation acceptance blocked on a full queue
  u64 channel_full = 0;   // producer cycles blocked on channel capacity
  u64 memory_wait = 0;    // cycles with reads outstanding in the memory model
};

struct LsqCounts {
  u64 loads_served = 0;
  u64 forwards = 0;
  u64 memory_reads = 0;
  u64 memory_writes = 0;
  u64 invalidations = 0;
  u64 ld_allocs_accepted = 0;
  u64 st_allocs_accepted = 0;
  u64 max_st_alloc_occupancy = 0;
  u64 max_commit_occupancy = 0;
};

// One load value as consumed by the compute kernel, in per-base request order.
struct LoadRecord {
  int base = -1;
  u64 reqid = 0;
  Word addr = 0;
  Word value = 0;
  bool discarded = false;  // speculative allocation invalidated by a poison read
};

struct SimReport {
  u64 total_cycles = 0;
  std::vector<LoopStats> loops;
  StallStats stalls;
  LsqCounts counts;
  u64 max_runahead = 0;  // max (AGU iterations issued - compute iterations issued)
  std::vector<std::vector<Word>> arrays;
  std::vector<LoadRecord> load_trace;

  // Steady-state II of the compute kernel's hottest loop.
  LoopStats main_loop() const;
};

struct StaticReport {
  u64 total_cycles = 0;
  struct LoopLine {
    std::string header;
    int rec_ii = 1;
    int body_latency = 0;
    u64 iterations = 0;
    u64 invocations = 0;
  };
  std::vector<LoopLine> loops;
};

}  // namespace lsqforge::sim

#endif  // LSQFORGE_REPORT_HPP_
