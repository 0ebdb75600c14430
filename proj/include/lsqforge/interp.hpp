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

#ifndef LSQFORGE_INTERP_HPP_
#define LSQFORGE_INTERP_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsqforge/ir.hpp"

namespace lsqforge::ir {

struct RunInputs {
  std::map<std::string, std::vector<Word>> arrays;  // missing arrays are zero-filled
  std::map<std::string, Word> scalars;
};

struct MemEvent {
  int instr_id = -1;
  int array = -1;
  Word addr = 0;
  Word value = 0;
  std::uint64_t tag = 0;  // per-base store count at the time of the access
};

struct AllocEvent {
  int instr_id = -1;
  int array = -1;
  bool is_store = false;
  Word addr = 0;
  std::uint64_t tag = 0;
};

struct LoopCount {
  int header = -1;
  std::uint64_t iterations = 0;   // times the header executed
  std::uint64_t invocations = 0;  // entries from outside the loop
};

struct InterpResult {
  std::vector<std::vector<Word>> arrays;
  std::vector<MemEvent> loads;   // program order, every base
  std::vector<MemEvent> stores;
  std::vector<AllocEvent> allocs;  // only for kernels carrying allocation ops
  std::vector<LoopCount> loop_counts;
  std::uint64_t steps = 0;
};

struct TrapError : std::runtime_error {
  TrapError(int instr_id, const std::string& what)
      : std::runtime_error("trap at instruction " + std::to_string(instr_id) + ": " + what),
        instr_id(instr_id) {}
  int instr_id;
};

// Strict sequential semantics over one kernel. Channel reads consume values
// previously written within the same execution; allocation instructions only
// record their trace. Throws TrapError on out-of-bounds access, division by
// zero, a read from an empty channel, or when the step limit is exceeded.
InterpResult interpret(const Module& m, const Kernel& k, const RunInputs& inputs,
                       std::uint64_t step_limit = 100'000'000);

std::vector<std::vector<Word>> init_arrays(const Module& m, const RunInputs& inputs);

}  // namespace lsqforge::ir

#endif  // LSQFORGE_INTERP_HPP_
