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

#ifndef LSQFORGE_MEMORY_HPP_
#define LSQFORGE_MEMORY_HPP_

#include <random>
#include <vector>

#include "lsqforge/channel.hpp"

namespace lsqforge::sim {

struct MemoryConfig {
  bool offchip = false;
  int read_lat_min = 1;
  int read_lat_max = 1;
  int store_lat_min = 1;
  int store_lat_max = 1;   // must stay <= the value used to size the commit queue
  int port_buffer = 0;     // extra latency of the decoupled store port (off-chip)
  int load_ports = 1;

  static MemoryConfig bram() { return {}; }
  static MemoryConfig dram() {
    MemoryConfig c;
    c.offchip = true;
    c.read_lat_min = 20;
    c.read_lat_max = 60;
    c.store_lat_min = 20;
    c.store_lat_max = 64;
    c.port_buffer = 1;
    c.load_ports = 1;
    return c;
  }
  int max_store_commit_cycles() const { return store_lat_max + port_buffer; }
};

// One protected base's backing store. Reads sample the array at issue time and
// complete out of order for off-chip memory; aliasing in-flight writes are the
// commit queue's concern, not the memory's.
class Memory {
 public:
  Memory(MemoryConfig cfg, std::vector<Word> data, u64 seed)
      : cfg_(cfg), data_(std::move(data)), rng_(seed ^ 0x9e3779b97f4a7c15ull) {}

  const MemoryConfig& config() const { return cfg_; }
  const std::vector<Word>& data() const { return data_; }

  struct Completion {
    u64 ticket;
    Word value;
  };

  bool read_in_bounds(Word addr) const {
    return addr >= 0 && addr < static_cast<Word>(data_.size());
  }

  void issue_read(u64 now, Word addr, u64 ticket) {
    // Speculated allocations may carry addresses the sequential program never
    // dereferences; they read as zero and the value is discarded downstream.
    Word v = read_in_bounds(addr) ? data_[static_cast<size_t>(addr)] : 0;
    if (!read_in_bounds(addr)) ++oob_reads_;
    inflight_.push_back({ticket, v, now + sample(cfg_.read_lat_min, cfg_.read_lat_max)});
    ++reads_;
  }

  // Returns the cycles the commit queue must hold this store.
  int write(Word addr, Word value) {
    if (addr < 0 || addr >= static_cast<Word>(data_.size())) {
      throw std::runtime_error("memory write out of bounds: " + std::to_string(addr));
    }
    data_[static_cast<size_t>(addr)] = value;
    ++writes_;
    return sample(cfg_.store_lat_min, cfg_.store_lat_max) + cfg_.port_buffer;
  }

  std::vector<Completion> completions(u64 now) {
    std::vector<Completion> done;
    for (auto it = inflight_.begin(); it != inflight_.end();) {
      if (it->ready <= now) {
        done.push_back({it->ticket, it->value});
        it = inflight_.erase(it);
      } else {
        ++it;
      }
    }
    return done;
  }

  bool idle() const { return inflight_.empty(); }
  u64 outstanding() const { return inflight_.size(); }
  u64 reads() const { return reads_; }
  u64 writes() const { return writes_; }
  u64 oob_reads() const { return oob_reads_; }

 private:
  int sample(int lo, int hi) {
    if (lo >= hi) return lo;
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng_);
  }

  struct Inflight {
    u64 ticket;
    Word value;
    u64 ready;
  };
  MemoryConfig cfg_;
  std::vector<Word> data_;
  std::mt19937_64 rng_;
  std::vector<Inflight> inflight_;
  u64 reads_ = 0;
  u64 writes_ = 0;
  u64 oob_reads_ = 0;
};

}  // namespace lsqforge::sim

#endif  // LSQFORGE_MEMORY_HPP_
