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

#include "lsqforge/oracle.hpp"

#include <deque>
#include <sstream>
#include <unordered_map>

namespace lsqforge::oracle {

using ir::Instruction;
using ir::Op;
using ir::Word;

ir::InterpResult run(const ir::Module& m, const ir::Kernel& k, const ir::RunInputs& inputs,
                     std::uint64_t step_limit) {
  ir::InterpResult res;

  // Sparse memory keyed by (array, address); initial contents lazily default
  // to the declared initializers.
  std::unordered_map<std::uint64_t, Word> mem;
  auto mem_key = [](int array, Word addr) {
    return (static_cast<std::uint64_t>(array) << 40) ^ static_cast<std::uint64_t>(addr);
  };
  auto initial = [&](int array, Word addr) -> Word {
    auto it = inputs.arrays.find(m.arrays[array].name);
    if (it == inputs.arrays.end()) return 0;
    auto idx = static_cast<size_t>(addr);
    return idx < it->second.size() ? it->second[idx] : 0;
  };
  auto read_mem = [&](int array, Word addr) -> Word {
    auto it = mem.find(mem_key(array, addr));
    return it == mem.end() ? initial(array, addr) : it->second;
  };

  std::unordered_map<int, Word> regs;
  for (int r : k.inputs) {
    auto it = inputs.scalars.find(k.regs[r]);
    regs[r] = it == inputs.scalars.end() ? 0 : it->second;
  }
  auto reg = [&](int r) -> Word {
    auto it = regs.find(r);
    return it == regs.end() ? 0 : it->second;
  };

  std::vector<std::uint64_t> stores_so_far(m.arrays.size(), 0);
  std::vector<std::deque<Word>> chans(m.channels.size());
  auto in_bounds = [&](int array, Word addr) {
    return addr >= 0 && addr < m.arrays[array].length;
  };

  int block = 0;
  std::uint64_t steps = 0;
  bool running = true;
  while (running) {
    int next = -1;
    for (const Instruction& ins : k.blocks[block].instrs) {
      if (++steps > step_limit) throw ir::TrapError(ins.id, "oracle step limit exceeded");
      Word a = ins.args[0] >= 0 ? reg(ins.args[0]) : 0;
      Word b = ins.args[1] >= 0 ? reg(ins.args[1]) : 0;
      Word c = ins.args[2] >= 0 ? reg(ins.args[2]) : 0;
      auto ua = static_cast<std::uint64_t>(a);
      auto ub = static_cast<std::uint64_t>(b);
      switch (ins.op) {
        case Op::kConst: regs[ins.dst] = ins.imm; break;
        case Op::kAdd: regs[ins.dst] = static_cast<Word>(ua + ub); break;
        case Op::kSub: regs[ins.dst] = static_cast<Word>(ua - ub); break;
        case Op::kMul: regs[ins.dst] = static_cast<Word>(ua * ub); break;
        case Op::kDiv:
          if (b == 0) throw ir::TrapError(ins.id, "division by zero");
          regs[ins.dst] = a / b;
          break;
        case Op::kMod:
          if (b == 0) throw ir::TrapError(ins.id, "modulo by zero");
          regs[ins.dst] = a % b;
          break;
        case Op::kAnd: regs[ins.dst] = static_cast<Word>(ua & ub); break;
        case Op::kOr: regs[ins.dst] = static_cast<Word>(ua | ub); break;
        case Op::kXor: regs[ins.dst] = static_cast<Word>(ua ^ ub); break;
        case Op::kShl: regs[ins.dst] = static_cast<Word>(ua << (ub & 63)); break;
        case Op::kShr: regs[ins.dst] = static_cast<Word>(ua >> (ub & 63)); break;
        case Op::kMin: regs[ins.dst] = a < b ? a : b; break;
        case Op::kMax: regs[ins.dst] = a > b ? a : b; break;
        case Op::kEq: regs[ins.dst] = a == b; break;
        case Op::kNe: regs[ins.dst] = a != b; break;
        case Op::kLt: regs[ins.dst] = a < b; break;
        case Op::kLe: regs[ins.dst] = a <= b; break;
        case Op::kGt: regs[ins.dst] = a > b; break;
        case Op::kGe: regs[ins.dst] = a >= b; break;
        case Op::kSelect: regs[ins.dst] = a ? b : c; break;
        case Op::kLoad: {
          if (!in_bounds(ins.array, a)) throw ir::TrapError(ins.id, "load out of bounds");
          Word v = read_mem(ins.array, a);
          regs[ins.dst] = v;
          res.loads.push_back({ins.id, ins.array, a, v, stores_so_far[ins.array]});
          break;
        }
        case Op::kStore: {
          if (!in_bounds(ins.array, a)) throw ir::TrapError(ins.id, "store out of bounds");
          mem[mem_key(ins.array, a)] = b;
          stores_so_far[ins.array]++;
          res.stores.push_back({ins.id, ins.array, a, b, stores_so_far[ins.array]});
          break;
        }
        case Op::kChRead: {
          auto& q = chans[ins.chan];
          if (q.empty()) throw ir::TrapError(ins.id, "read from empty channel");
          regs[ins.dst] = q.front();
          q.pop_front();
          break;
        }
        case Op::kChWrite: chans[ins.chan].push_back(a); break;
        case Op::kStValWrite: chans[ins.chan].push_back(a); break;
        case Op::kLdAlloc:
          res.allocs.push_back({ins.id, ins.array, false, a, static_cast<std::uint64_t>(b)});
          break;
        case Op::kStAlloc:
          res.allocs.push_back({ins.id, ins.array, true, a, static_cast<std::uint64_t>(b)});
          break;
        case Op::kBr: next = ins.succ0; break;
        case Op::kCondBr: next = a ? ins.succ0 : ins.succ1; break;
        case Op::kRet: running = false; break;
      }
      if (!running) break;
    }
    if (!running) break;
    block = next;
  }
  res.steps = steps;

  // Materialize final memory densely for comparisons.
  res.arrays.reserve(m.arrays.size());
  for (size_t ai = 0; ai < m.arrays.size(); ++ai) {
    std::vector<Word> data(static_cast<size_t>(m.arrays[ai].length));
    for (Word addr = 0; addr < m.arrays[ai].length; ++addr) {
      data[static_cast<size_t>(addr)] = read_mem(static_cast<int>(ai), addr);
    }
    res.arrays.push_back(std::move(data));
  }
  return res;
}

std::optional<Diff> check_equivalence(const ir::Module& m, const ir::Kernel& original,
                                      const ir::RunInputs& inputs, const sim::SimReport& report,
                                      const std::vector<int>& protected_bases) {
  ir::InterpResult truth = run(m, original, inputs);

  for (size_t ai = 0; ai < m.arrays.size(); ++ai) {
    if (report.arrays.size() <= ai) return Diff{"simulation reported too few arrays"};
    for (size_t i = 0; i < truth.arrays[ai].size(); ++i) {
      if (truth.arrays[ai][i] != report.arrays[ai][i]) {
        std::ostringstream os;
        os << "final memory mismatch at " << m.arrays[ai].name << "[" << i
           << "]: oracle=" << truth.arrays[ai][i] << " sim=" << report.arrays[ai][i];
        return Diff{os.str()};
      }
    }
  }

  for (int base : protected_bases) {
    std::vector<const ir::MemEvent*> expected;
    for (const auto& e : truth.loads) {
      if (e.array == base) expected.push_back(&e);
    }
    std::vector<const sim::LoadRecord*> got;
    for (const auto& r : report.load_trace) {
      if (r.base == base && !r.discarded) got.push_back(&r);
    }
    if (expected.size() != got.size()) {
      std::ostringstream os;
      os << "load count mismatch on " << m.arrays[base].name << ": oracle=" << expected.size()
         << " sim=" << got.size();
      return Diff{os.str()};
    }
    for (size_t i = 0; i < expected.size(); ++i) {
      if (expected[i]->addr != got[i]->addr || expected[i]->value != got[i]->value) {
        std::ostringstream os;
        os << "load " << i << " on " << m.arrays[base].name << " diverges: oracle ("
           << expected[i]->addr << " -> " << expected[i]->value << ", tag " << expected[i]->tag
           << ") sim (" << got[i]->addr << " -> " << got[i]->value << ", reqid "
           << got[i]->reqid << ")";
        return Diff{os.str()};
      }
    }
  }
  return std::nullopt;
}

}  // namespace lsqforge::oracle
