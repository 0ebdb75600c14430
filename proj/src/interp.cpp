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

#include "lsqforge/interp.hpp"

#include <deque>

#include "lsqforge/analysis.hpp"

namespace lsqforge::ir {

namespace {

Word wrap_binop(Op op, Word a, Word b, int instr_id) {
  auto ua = static_cast<std::uint64_t>(a);
  auto ub = static_cast<std::uint64_t>(b);
  switch (op) {
    case Op::kAdd: return static_cast<Word>(ua + ub);
    case Op::kSub: return static_cast<Word>(ua - ub);
    case Op::kMul: return static_cast<Word>(ua * ub);
    case Op::kDiv:
      if (b == 0) throw TrapError(instr_id, "division by zero");
      return a / b;
    case Op::kMod:
      if (b == 0) throw TrapError(instr_id, "modulo by zero");
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
    default: throw TrapError(instr_id, "not a binary op");
  }
}

}  // namespace

std::vector<std::vector<Word>> init_arrays(const Module& m, const RunInputs& inputs) {
  std::vector<std::vector<Word>> arrays;
  arrays.reserve(m.arrays.size());
  for (const auto& decl : m.arrays) {
    std::vector<Word> data(static_cast<size_t>(decl.length), 0);
    auto it = inputs.arrays.find(decl.name);
    if (it != inputs.arrays.end()) {
      if (it->second.size() > data.size()) {
        throw ParseError("initializer for array " + decl.name + " is too long");
      }
      std::copy(it->second.begin(), it->second.end(), data.begin());
    }
    arrays.push_back(std::move(data));
  }
  return arrays;
}

InterpResult interpret(const Module& m, const Kernel& k, const RunInputs& inputs,
                       std::uint64_t step_limit) {
  InterpResult res;
  res.arrays = init_arrays(m, inputs);
  CfgAnalysis cfg(k);
  for (const auto& loop : cfg.loops()) res.loop_counts.push_back({loop.header, 0, 0});

  std::vector<Word> regs(k.regs.size(), 0);
  for (int r : k.inputs) {
    auto it = inputs.scalars.find(k.regs[r]);
    if (it != inputs.scalars.end()) regs[r] = it->second;
  }
  std::vector<std::uint64_t> store_count(m.arrays.size(), 0);
  std::vector<std::deque<Word>> chans(m.channels.size());

  int block = 0;
  int prev_block = -1;
  while (true) {
    for (size_t li = 0; li < cfg.loops().size(); ++li) {
      if (cfg.loops()[li].header == block) {
        res.loop_counts[li].iterations++;
        if (prev_block < 0 || !cfg.loops()[li].contains(prev_block)) {
          res.loop_counts[li].invocations++;
        }
      }
    }
    const BasicBlock& bb = k.blocks[block];
    int next_block = -1;
    for (const auto& ins : bb.instrs) {
      if (++res.steps > step_limit) throw TrapError(ins.id, "step limit exceeded");
      auto arg = [&](int i) { return regs[ins.args[i]]; };
      switch (ins.op) {
        case Op::kConst:
          regs[ins.dst] = ins.imm;
          break;
        case Op::kSelect:
          regs[ins.dst] = arg(0) ? arg(1) : arg(2);
          break;
        case Op::kLoad: {
          Word addr = arg(0);
          auto& a = res.arrays[ins.array];
          if (addr < 0 || addr >= static_cast<Word>(a.size())) {
            throw TrapError(ins.id, "load out of bounds: " + m.arrays[ins.array].name + "[" +
                                        std::to_string(addr) + "]");
          }
          regs[ins.dst] = a[static_cast<size_t>(addr)];
          res.loads.push_back({ins.id, ins.array, addr, regs[ins.dst], store_count[ins.array]});
          break;
        }
        case Op::kStore: {
          Word addr = arg(0);
          auto& a = res.arrays[ins.array];
          if (addr < 0 || addr >= static_cast<Word>(a.size())) {
            throw TrapError(ins.id, "store out of bounds: " + m.arrays[ins.array].name + "[" +
                                        std::to_string(addr) + "]");
          }
          a[static_cast<size_t>(addr)] = arg(1);
          store_count[ins.array]++;
          res.stores.push_back({ins.id, ins.array, addr, arg(1), store_count[ins.array]});
          break;
        }
        case Op::kChRead: {
          auto& q = chans[ins.chan];
          if (q.empty()) throw TrapError(ins.id, "read from empty channel");
          regs[ins.dst] = q.front();
          q.pop_front();
          break;
        }
        case Op::kChWrite:
          chans[ins.chan].push_back(arg(0));
          break;
        case Op::kStValWrite:
          chans[ins.chan].push_back(arg(0));  // valid bit is a simulator concern
          break;
        case Op::kLdAlloc:
          res.allocs.push_back({ins.id, ins.array, false, arg(0),
                                static_cast<std::uint64_t>(arg(1))});
          break;
        case Op::kStAlloc:
          res.allocs.push_back({ins.id, ins.array, true, arg(0),
                                static_cast<std::uint64_t>(arg(1))});
          break;
        case Op::kBr:
          next_block = ins.succ0;
          break;
        case Op::kCondBr:
          next_block = arg(0) ? ins.succ0 : ins.succ1;
          break;
        case Op::kRet:
          return res;
        default:
          regs[ins.dst] = wrap_binop(ins.op, arg(0), arg(1), ins.id);
          break;
      }
    }
    prev_block = block;
    block = next_block;
  }
}

}  // namespace lsqforge::ir
