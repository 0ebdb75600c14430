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

#include "lsqforge/ir.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace lsqforge::ir {

namespace {

struct OpInfo {
  Op op;
  const char* name;
  bool has_dst;
  int num_args;
};

constexpr OpInfo kOpTable[] = {
    {Op::kConst, "const", true, 0},
    {Op::kAdd, "add", true, 2},
    {Op::kSub, "sub", true, 2},
    {Op::kMul, "mul", true, 2},
    {Op::kDiv, "div", true, 2},
    {Op::kMod, "mod", true, 2},
    {Op::kAnd, "and", true, 2},
    {Op::kOr, "or", true, 2},
    {Op::kXor, "xor", true, 2},
    {Op::kShl, "shl", true, 2},
    {Op::kShr, "shr", true, 2},
    {Op::kMin, "min", true, 2},
    {Op::kMax, "max", true, 2},
    {Op::kEq, "eq", true, 2},
    {Op::kNe, "ne", true, 2},
    {Op::kLt, "lt", true, 2},
    {Op::kLe, "le", true, 2},
    {Op::kGt, "gt", true, 2},
    {Op::kGe, "ge", true, 2},
    {Op::kSelect, "select", true, 3},
    {Op::kLoad, "load", true, 1},
    {Op::kStore, "store", false, 2},
    {Op::kChRead, "chread", true, 0},
    {Op::kChWrite, "chwrite", false, 1},
    {Op::kLdAlloc, "ldalloc", false, 2},
    {Op::kStAlloc, "stalloc", false, 2},
    {Op::kStValWrite, "stvalw", false, 2},
    {Op::kBr, "br", false, 0},
    {Op::kCondBr, "condbr", false, 1},
    {Op::kRet, "ret", false, 0},
};

const OpInfo& info(Op op) { return kOpTable[static_cast<int>(op)]; }

}  // namespace

bool op_has_dst(Op op) { return info(op).has_dst; }
int op_num_args(Op op) { return info(op).num_args; }
bool op_is_terminator(Op op) {
  return op == Op::kBr || op == Op::kCondBr || op == Op::kRet;
}
bool op_is_binop(Op op) {
  return op >= Op::kAdd && op <= Op::kGe;
}
const char* op_name(Op op) { return info(op).name; }

std::optional<Op> op_from_name(const std::string& name) {
  for (const auto& e : kOpTable) {
    if (name == e.name) return e.op;
  }
  return std::nullopt;
}

int Kernel::reg(const std::string& name) {
  int r = find_reg(name);
  if (r >= 0) return r;
  regs.push_back(name);
  return static_cast<int>(regs.size()) - 1;
}

int Kernel::find_reg(const std::string& name) const {
  for (size_t i = 0; i < regs.size(); ++i) {
    if (regs[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int Kernel::find_block(const std::string& name) const {
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::string Kernel::fresh_reg(const std::string& hint) {
  if (find_reg(hint) < 0) return hint;
  for (int i = 0;; ++i) {
    std::string candidate = hint + "." + std::to_string(i);
    if (find_reg(candidate) < 0) return candidate;
  }
}

void Kernel::renumber() {
  locations_.clear();
  int id = 0;
  for (size_t b = 0; b < blocks.size(); ++b) {
    for (size_t i = 0; i < blocks[b].instrs.size(); ++i) {
      blocks[b].instrs[i].id = id++;
      locations_.emplace_back(static_cast<int>(b), static_cast<int>(i));
    }
  }
}

int Kernel::num_instrs() const { return static_cast<int>(locations_.size()); }

const Instruction& Kernel::instr(int id) const {
  auto [b, i] = locations_.at(id);
  return blocks[b].instrs[i];
}

std::pair<int, int> Kernel::locate(int id) const { return locations_.at(id); }

int Module::find_array(const std::string& name) const {
  for (size_t i = 0; i < arrays.size(); ++i) {
    if (arrays[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Module::find_channel(const std::string& name) const {
  for (size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Module::add_channel(const std::string& name, int capacity) {
  if (find_channel(name) >= 0) {
    throw ParseError("duplicate channel: " + name);
  }
  channels.push_back({name, capacity});
  return static_cast<int>(channels.size()) - 1;
}

Kernel& Module::kernel(const std::string& name) {
  for (auto& k : kernels) {
    if (k.name == name) return k;
  }
  throw ParseError("no kernel named " + name);
}

const Kernel& Module::kernel(const std::string& name) const {
  for (const auto& k : kernels) {
    if (k.name == name) return k;
  }
  throw ParseError("no kernel named " + name);
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) {
    if (t[0] == '#') break;  // comment to end of line
    toks.push_back(t);
  }
  return toks;
}

Word parse_int(const std::string& s, int lineno) {
  try {
    size_t pos = 0;
    Word v = std::stoll(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(lineno) + ": bad integer '" + s + "'");
  }
}

struct PendingBranch {
  int block;
  int instr;
  std::string target0;
  std::string target1;
  int lineno;
};

}  // namespace

Module parse_module(const std::string& text) {
  Module m;
  Kernel* k = nullptr;
  int cur_block = -1;
  std::vector<PendingBranch> pending;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("line " + std::to_string(lineno) + ": " + msg);
  };

  auto resolve_branches = [&]() {
    if (k == nullptr) return;
    for (const auto& p : pending) {
      auto& ins = k->blocks[p.block].instrs[p.instr];
      ins.succ0 = k->find_block(p.target0);
      if (ins.succ0 < 0) {
        throw ParseError("line " + std::to_string(p.lineno) + ": unknown block '" +
                         p.target0 + "'");
      }
      if (ins.op == Op::kCondBr) {
        ins.succ1 = k->find_block(p.target1);
        if (ins.succ1 < 0) {
          throw ParseError("line " + std::to_string(p.lineno) + ": unknown block '" +
                           p.target1 + "'");
        }
      }
    }
    pending.clear();
    k->renumber();
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];

    if (head == "array") {
      if (toks.size() != 3) throw fail("expected: array <name> <length>");
      if (m.find_array(toks[1]) >= 0) throw fail("duplicate array " + toks[1]);
      m.arrays.push_back({toks[1], parse_int(toks[2], lineno)});
      continue;
    }
    if (head == "channel") {
      if (toks.size() != 3) throw fail("expected: channel <name> <capacity>");
      if (m.find_channel(toks[1]) >= 0) throw fail("duplicate channel " + toks[1]);
      m.channels.push_back({toks[1], static_cast<int>(parse_int(toks[2], lineno))});
      continue;
    }
    if (head == "lsqport") {
      if (toks.size() != 5) throw fail("expected: lsqport <base> <load|store> <allocch> <valch>");
      LsqPort p;
      p.array = m.find_array(toks[1]);
      if (p.array < 0) throw fail("unknown array " + toks[1]);
      if (toks[2] == "store") {
        p.is_store = true;
      } else if (toks[2] != "load") {
        throw fail("lsqport kind must be load or store");
      }
      p.alloc_chan = m.find_channel(toks[3]);
      p.value_chan = m.find_channel(toks[4]);
      if (p.alloc_chan < 0 || p.value_chan < 0) throw fail("unknown channel in lsqport");
      m.lsq_ports.push_back(p);
      continue;
    }
    if (head == "kernel") {
      if (toks.size() != 2) throw fail("expected: kernel <name>");
      resolve_branches();
      m.kernels.emplace_back();
      k = &m.kernels.back();
      k->name = toks[1];
      cur_block = -1;
      continue;
    }
    if (k == nullptr) throw fail("statement outside a kernel");

    if (head == "input") {
      if (toks.size() != 2) throw fail("expected: input <reg>");
      k->inputs.push_back(k->reg(toks[1]));
      continue;
    }
    if (head == "block") {
      if (toks.size() != 2) throw fail("expected: block <name>:");
      std::string name = toks[1];
      if (!name.empty() && name.back() == ':') name.pop_back();
      if (name.empty()) throw fail("empty block name");
      if (k->find_block(name) >= 0) throw fail("duplicate block " + name);
      k->blocks.push_back({name, {}});
      cur_block = static_cast<int>(k->blocks.size()) - 1;
      continue;
    }
    if (cur_block < 0) throw fail("instruction outside a block");

    // Instruction forms:
    //   dst = <op> args...
    //   store <array> <addr> <val>
    //   chwrite <ch> <reg> | stvalw <ch> <val> <valid>
    //   ldalloc/stalloc <ch> <array> <addr> <tag>
    //   br <blk> | condbr <c> <blk> <blk> | ret
    Instruction ins;
    size_t at = 0;
    if (toks.size() >= 2 && toks[1] == "=") {
      if (toks.size() < 3) throw fail("truncated instruction");
      auto op = op_from_name(toks[2]);
      if (!op || !op_has_dst(*op)) throw fail("bad op '" + toks[2] + "'");
      ins.op = *op;
      ins.dst = k->reg(toks[0]);
      at = 3;
      if (ins.op == Op::kConst) {
        if (toks.size() != 4) throw fail("expected: dst = const <imm>");
        ins.imm = parse_int(toks[3], lineno);
        k->blocks[cur_block].instrs.push_back(ins);
        continue;
      }
      if (ins.op == Op::kLoad) {
        if (toks.size() != 5) throw fail("expected: dst = load <array> <addr>");
        ins.array = m.find_array(toks[3]);
        if (ins.array < 0) throw fail("unknown array " + toks[3]);
        ins.args[0] = k->reg(toks[4]);
        k->blocks[cur_block].instrs.push_back(ins);
        continue;
      }
      if (ins.op == Op::kChRead) {
        if (toks.size() < 4 || toks.size() > 5) throw fail("expected: dst = chread <ch> [discard]");
        ins.chan = m.find_channel(toks[3]);
        if (ins.chan < 0) throw fail("unknown channel " + toks[3]);
        if (toks.size() == 5) {
          if (toks[4] != "discard") throw fail("expected 'discard'");
          ins.discard = true;
        }
        k->blocks[cur_block].instrs.push_back(ins);
        continue;
      }
      int n = op_num_args(ins.op);
      if (static_cast<int>(toks.size()) != 3 + n) throw fail("operand count mismatch");
      for (int i = 0; i < n; ++i) ins.args[i] = k->reg(toks[at + i]);
      k->blocks[cur_block].instrs.push_back(ins);
      continue;
    }

    auto op = op_from_name(head);
    if (!op) throw fail("unknown statement '" + head + "'");
    ins.op = *op;
    switch (ins.op) {
      case Op::kStore: {
        if (toks.size() != 4) throw fail("expected: store <array> <addr> <val>");
        ins.array = m.find_array(toks[1]);
        if (ins.array < 0) throw fail("unknown array " + toks[1]);
        ins.args[0] = k->reg(toks[2]);
        ins.args[1] = k->reg(toks[3]);
        break;
      }
      case Op::kChWrite: {
        if (toks.size() != 3) throw fail("expected: chwrite <ch> <reg>");
        ins.chan = m.find_channel(toks[1]);
        if (ins.chan < 0) throw fail("unknown channel " + toks[1]);
        ins.args[0] = k->reg(toks[2]);
        break;
      }
      case Op::kStValWrite: {
        if (toks.size() != 4) throw fail("expected: stvalw <ch> <val> <valid>");
        ins.chan = m.find_channel(toks[1]);
        if (ins.chan < 0) throw fail("unknown channel " + toks[1]);
        ins.args[0] = k->reg(toks[2]);
        ins.args[1] = k->reg(toks[3]);
        break;
      }
      case Op::kLdAlloc:
      case Op::kStAlloc: {
        if (toks.size() != 5) throw fail("expected: ldalloc|stalloc <ch> <array> <addr> <tag>");
        ins.chan = m.find_channel(toks[1]);
        if (ins.chan < 0) throw fail("unknown channel " + toks[1]);
        ins.array = m.find_array(toks[2]);
        if (ins.array < 0) throw fail("unknown array " + toks[2]);
        ins.args[0] = k->reg(toks[3]);
        ins.args[1] = k->reg(toks[4]);
        break;
      }
      case Op::kBr: {
        if (toks.size() != 2) throw fail("expected: br <block>");
        pending.push_back({cur_block, static_cast<int>(k->blocks[cur_block].instrs.size()),
                           toks[1], "", lineno});
        break;
      }
      case Op::kCondBr: {
        if (toks.size() != 4) throw fail("expected: condbr <c> <block> <block>");
        ins.args[0] = k->reg(toks[1]);
        pending.push_back({cur_block, static_cast<int>(k->blocks[cur_block].instrs.size()),
                           toks[2], toks[3], lineno});
        break;
      }
      case Op::kRet: {
        if (toks.size() != 1) throw fail("expected: ret");
        break;
      }
      default:
        throw fail("op '" + head + "' needs a destination");
    }
    k->blocks[cur_block].instrs.push_back(ins);
  }
  resolve_branches();
  validate(m);
  return m;
}

namespace {

void print_kernel(std::ostringstream& os, const Module& m, const Kernel& k) {
  os << "kernel " << k.name << "\n";
  for (int r : k.inputs) os << "input " << k.regs[r] << "\n";
  for (const auto& b : k.blocks) {
    os << "block " << b.name << ":\n";
    for (const auto& ins : b.instrs) {
      os << "  ";
      if (ins.dst >= 0) os << k.regs[ins.dst] << " = ";
      os << op_name(ins.op);
      switch (ins.op) {
        case Op::kConst:
          os << " " << ins.imm;
          break;
        case Op::kLoad:
          os << " " << m.arrays[ins.array].name << " " << k.regs[ins.args[0]];
          break;
        case Op::kStore:
          os << " " << m.arrays[ins.array].name << " " << k.regs[ins.args[0]] << " "
             << k.regs[ins.args[1]];
          break;
        case Op::kChRead:
          os << " " << m.channels[ins.chan].name;
          if (ins.discard) os << " discard";
          break;
        case Op::kChWrite:
          os << " " << m.channels[ins.chan].name << " " << k.regs[ins.args[0]];
          break;
        case Op::kStValWrite:
          os << " " << m.channels[ins.chan].name << " " << k.regs[ins.args[0]] << " "
             << k.regs[ins.args[1]];
          break;
        case Op::kLdAlloc:
        case Op::kStAlloc:
          os << " " << m.channels[ins.chan].name << " " << m.arrays[ins.array].name << " "
             << k.regs[ins.args[0]] << " " << k.regs[ins.args[1]];
          break;
        case Op::kBr:
          os << " " << k.blocks[ins.succ0].name;
          break;
        case Op::kCondBr:
          os << " " << k.regs[ins.args[0]] << " " << k.blocks[ins.succ0].name << " "
             << k.blocks[ins.succ1].name;
          break;
        case Op::kRet:
          break;
        default:
          for (int i = 0; i < op_num_args(ins.op); ++i) os << " " << k.regs[ins.args[i]];
          break;
      }
      os << "\n";
    }
  }
}

}  // namespace

std::string print_module(const Module& m) {
  std::ostringstream os;
  for (const auto& a : m.arrays) os << "array " << a.name << " " << a.length << "\n";
  for (const auto& c : m.channels) os << "channel " << c.name << " " << c.capacity << "\n";
  for (const auto& p : m.lsq_ports) {
    os << "lsqport " << m.arrays[p.array].name << " " << (p.is_store ? "store" : "load")
       << " " << m.channels[p.alloc_chan].name << " " << m.channels[p.value_chan].name << "\n";
  }
  for (const auto& k : m.kernels) {
    os << "\n";
    print_kernel(os, m, k);
  }
  return os.str();
}

void validate(const Module& m) {
  for (const auto& a : m.arrays) {
    if (a.length < 1) throw ParseError("array " + a.name + " must have length >= 1");
  }
  for (const auto& k : m.kernels) {
    if (k.blocks.empty()) throw ParseError("kernel " + k.name + " has no blocks");
    std::vector<int> preds(k.blocks.size(), 0);
    for (size_t b = 0; b < k.blocks.size(); ++b) {
      const auto& blk = k.blocks[b];
      if (blk.instrs.empty()) {
        throw ParseError("block " + blk.name + " in " + k.name + " is empty");
      }
      for (size_t i = 0; i < blk.instrs.size(); ++i) {
        const auto& ins = blk.instrs[i];
        bool last = i + 1 == blk.instrs.size();
        if (op_is_terminator(ins.op) != last) {
          throw ParseError("block " + blk.name + " in " + k.name +
                           ": terminator must be exactly the last instruction");
        }
      }
      const auto& t = blk.terminator();
      if (t.op == Op::kBr) preds[t.succ0]++;
      if (t.op == Op::kCondBr) {
        preds[t.succ0]++;
        preds[t.succ1]++;
      }
    }
    if (preds[0] != 0) {
      throw ParseError("kernel " + k.name + ": entry block must have no predecessors");
    }
  }
}

}  // namespace lsqforge::ir
