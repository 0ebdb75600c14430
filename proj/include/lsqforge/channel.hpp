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

#ifndef LSQFORGE_CHANNEL_HPP_
#define LSQFORGE_CHANNEL_HPP_

#include <cstdint>
#include <deque>
#include <string>

#include "lsqforge/ir.hpp"

namespace lsqforge::sim {

using ir::Word;
using u64 = std::uint64_t;

// Channel payload. Field meaning depends on the channel's role:
//   load alloc:  a=addr, b=tag,   c=reqid
//   store alloc: a=addr, b=tag
//   store value: a=value, b=valid, c=svid
//   load value:  a=value, b=reqid, c=addr
//   scalar:      a=value
struct Token {
  Word a = 0;
  Word b = 0;
  Word c = 0;
};

// Latency-insensitive FIFO: a push at cycle t becomes visible to the reader
// at t + write-to-read latency. Capacity counts pushed-not-yet-popped tokens.
class Channel {
 public:
  Channel(std::string name, int capacity, int w2r_latency)
      : name_(std::move(name)), capacity_(capacity), w2r_(w2r_latency) {}

  const std::string& name() const { return name_; }
  int capacity() const { return capacity_; }

  bool can_push(u64 now) const {
    (void)now;
    return static_cast<int>(entries_.size()) < capacity_;
  }
  void push(u64 now, Token t) {
    entries_.push_back({t, now + static_cast<u64>(w2r_)});
    ++pushes_;
  }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Indexed access so a consumer can peek past tokens it has committed to pop
  // at a scheduled future cycle.
  bool visible_at(size_t index, u64 now) const {
    return index < entries_.size() && entries_[index].visible <= now;
  }
  const Token& at(size_t index) const { return entries_[index].token; }

  Token pop() {
    Token t = entries_.front().token;
    entries_.pop_front();
    ++pops_;
    return t;
  }

  u64 pushes() const { return pushes_; }
  u64 pops() const { return pops_; }

 private:
  struct Entry {
    Token token;
    u64 visible;
  };
  std::string name_;
  int capacity_;
  int w2r_;
  std::deque<Entry> entries_;
  u64 pushes_ = 0;
  u64 pops_ = 0;
};

}  // namespace lsqforge::sim

#endif  // LSQFORGE_CHANNEL_HPP_
