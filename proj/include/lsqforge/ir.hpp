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

#ifndef LSQFORGE_IR_HPP_
#define LSQFORGE_IR_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsqforge::ir {

// Machine word. All arithmetic wraps at 64 bits.
using Word = std::int64_t;

enum class Op {
  kConst,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kMod,
  kAnd,
  kOr,
  kXor,
  kShl,
  kShr,
  kMin,
  kMax,
  kEq,
  kNe,
  kLt,
  kLe,
  kGt,
  kGe,
  kSelect,
  kLoad,      // dst = load array[args[0]]
  kStore,     // store array[args[0]] = args[1]
  kChRead,    // dst = pop(chan)
  kChWrite,   // push(chan, args[0])
  kLdAlloc,   // LSQ load allocation: (array, addr=args[0], tag=args[1]) -> chan
  kStAlloc,   // LSQ store allocation: (array, addr=args[0], tag=args[1]) -> chan
  kStValWrite,// LSQ store value: push(chan, value=args[0], valid=args[1])
  kBr,        // goto succ0
  kCondBr,    // if args[0] goto succ0 else succ1
  kRet,
};

bool op_has_dst(Op op);
int op_num_args(Op op);
bool op_is_terminator(Op op);
bool op_is_binop(Op op);
const char* op_name(Op op);
std::optional<Op> op_from_name(const std::string& name);

struct Instruction {
  Op op = Op::kRet;
  int dst = -1;                          // register index, -1 if none
  std::array<int, 3> args = {-1, -1, -1};// register operands
  Word imm = 0;                          // kConst immediate
  int array = -1;                        // memory/allocation ops
  int chan = -1;                         // channel ops
  int succ0 = -1;
  int succ1 = -1;
  bool discard = false;                  // kChRead that drops its value
  int id = -1;                           // unique within a kernel, set by renumber()
};

struct BasicBlock {
  std::string name;
  std::vector<Instruction> instrs;       // last one is the terminator

  const Instruction& terminator() const { return instrs.back(); }
  Instruction& terminator() { return instrs.back(); }
};

struct ArrayDecl {
  std::string name;
  Word length = 0;
};

struct ChannelDecl {
  std::string name;
  int capacity = 16;
};

// Ties one protected memory operation to its LSQ-facing channels.
struct LsqPort {
  int array = -1;       // protected base
  bool is_store = false;
  int alloc_chan = -1;  // AGU -> LSQ: (address, tag)
  int value_chan = -1;  // load: LSQ -> compute; store: compute -> LSQ
};

class Kernel {
 public:
  std::string name;
  std::vector<std::string> regs;          // register names, index = id
  std::vector<int> inputs;                // registers initialized from run inputs
  std::vector<BasicBlock> blocks;         // blocks[0] is the entry

  int reg(const std::string& name);       // intern, creating if needed
  int find_reg(const std::string& name) const;  // -1 if absent
  int find_block(const std::string& name) const;
  std::string fresh_reg(const std::string& hint);

  // Assigns dense instruction ids in (block, position) order.
  void renumber();
  int num_instrs() const;
  const Instruction& instr(int id) const;

  // (block index, position) for an instruction id; renumber() first.
  std::pair<int, int> locate(int id) const;

 private:
  std::vector<std::pair<int, int>> locations_;
};

// A compilation unit: shared memory + channels + one or more kernels.
// Single-kernel modules are the common case before decoupling.
struct Module {
  std::vector<ArrayDecl> arrays;
  std::vector<ChannelDecl> channels;
  std::vector<LsqPort> lsq_ports;
  std::vector<Kernel> kernels;

  int find_array(const std::string& name) const;
  int find_channel(const std::string& name) const;
  int add_channel(const std::string& name, int capacity);
  Kernel& kernel(const std::string& name);
  const Kernel& kernel(const std::string& name) const;
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Line-oriented textual format. parse(print(m)) is the identity.
Module parse_module(const std::string& text);
std::string print_module(const Module& m);

// Structural invariants: entry has no predecessors, exactly one terminator
// per block, operands and blocks resolve. Throws ParseError on violation.
void validate(const Module& m);

}  // namespace lsqforge::ir

#endif  // LSQFORGE_IR_HPP_
