#include "subt/machine.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace subt {

namespace {

constexpr std::array<Op, 13> kCodedOps = {Op::Inc,  Op::Decj, Op::Jmp,   Op::Halt, Op::Set,  Op::Add, Op::Pair,
                                          Op::Unpair, Op::Jeq, Op::Halve, Op::Nth,  Op::Snoc, Op::Sim};

enum class Slot : std::uint8_t { Reg, Label, Const };

// operand kinds per op
std::span<const Slot> operand_kinds(Op op) {
  static constexpr Slot r1[] = {Slot::Reg};
  static constexpr Slot rl[] = {Slot::Reg, Slot::Label};
  static constexpr Slot l1[] = {Slot::Label};
  static constexpr Slot rk[] = {Slot::Reg, Slot::Const};
  static constexpr Slot rrr[] = {Slot::Reg, Slot::Reg, Slot::Reg};
  static constexpr Slot rrl[] = {Slot::Reg, Slot::Reg, Slot::Label};
  static constexpr Slot rrrr[] = {Slot::Reg, Slot::Reg, Slot::Reg, Slot::Reg};
  switch (op) {
    case Op::Nop: return {};
    case Op::Inc:
    case Op::Halt: return r1;
    case Op::Decj: return rl;
    case Op::Jmp: return l1;
    case Op::Set: return rk;
    case Op::Add:
    case Op::Pair:
    case Op::Unpair:
    case Op::Halve:
    case Op::Nth:
    case Op::Snoc: return rrr;
    case Op::Jeq: return rrl;
    case Op::Sim: return rrrr;
  }
  return {};
}

}  // namespace

std::size_t arity(Op op) { return operand_kinds(op).size(); }

std::string_view mnemonic(Op op) {
  switch (op) {
    case Op::Nop: return "NOP";
    case Op::Inc: return "INC";
    case Op::Decj: return "DECJ";
    case Op::Jmp: return "JMP";
    case Op::Halt: return "HALT";
    case Op::Set: return "SET";
    case Op::Add: return "ADD";
    case Op::Pair: return "PAIR";
    case Op::Unpair: return "UNPAIR";
    case Op::Jeq: return "JEQ";
    case Op::Halve: return "HALVE";
    case Op::Nth: return "NTH";
    case Op::Snoc: return "SNOC";
    case Op::Sim: return "SIM";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// numbering

Nat encode_instruction(const Instruction& ins) {
  if (ins.op == Op::Nop) return 0;
  std::size_t k = arity(ins.op);
  // all operands but the last go into exponent parts
  Nat payload = ins.arg[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) payload = exp_pair(to_u64(ins.arg[i]), payload);
  auto pos = std::find(kCodedOps.begin(), kCodedOps.end(), ins.op) - kCodedOps.begin();
  return 1 + static_cast<unsigned>(pos) + 13 * payload;
}

Instruction decode_instruction(const Nat& code) {
  Instruction ins;
  if (code == 0) return ins;
  Nat c = code - 1;
  ins.op = kCodedOps[static_cast<std::size_t>(c % 13)];
  Nat rest = c / 13;
  std::size_t k = arity(ins.op);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    auto [x, y] = exp_unpair(rest);
    ins.arg[i] = std::move(x);
    rest = std::move(y);
  }
  ins.arg[k - 1] = std::move(rest);
  return ins;
}

Nat encode(const Program& p) {
  std::vector<Nat> codes;
  codes.reserve(p.code.size());
  for (const auto& ins : p.code) codes.push_back(encode_instruction(ins));
  return seq_encode(codes);
}

Program decode(const Nat& n) {
  Program p;
  for (const auto& c : seq_decode(n)) p.code.push_back(decode_instruction(c));
  return p;
}

// ---------------------------------------------------------------------------
// text format

Program parse_program(std::string_view text) {
  Program p;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::toupper(c); });
    Instruction ins;
    bool found = false;
    for (std::size_t i = 0; i < kOpCount; ++i) {
      if (mnemonic(static_cast<Op>(i)) == word) {
        ins.op = static_cast<Op>(i);
        found = true;
      }
    }
    if (!found) throw ParseError("line " + std::to_string(lineno) + ": unknown instruction '" + word + "'");
    auto kinds = operand_kinds(ins.op);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      std::string tok;
      if (!(ls >> tok)) throw ParseError("line " + std::to_string(lineno) + ": missing operand");
      if (kinds[i] == Slot::Reg && (tok[0] == 'r' || tok[0] == 'R')) tok.erase(0, 1);
      try {
        ins.arg[i] = nat_from_string(tok);
      } catch (const std::invalid_argument&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad operand '" + tok + "'");
      }
    }
    if (std::string extra; ls >> extra)
      throw ParseError("line " + std::to_string(lineno) + ": trailing token '" + extra + "'");
    p.code.push_back(std::move(ins));
  }
  return p;
}

std::string format_program(const Program& p) {
  std::string out;
  for (const auto& ins : p.code) {
    out += mnemonic(ins.op);
    auto kinds = operand_kinds(ins.op);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      out += ' ';
      if (kinds[i] == Slot::Reg) out += 'r';
      out += to_string(ins.arg[i]);
    }
    out += '\n';
  }
  return out;
}

Budget::Budget(std::uint64_t steps, std::uint64_t rounds, std::uint64_t oracle)
    : step_fuel(steps), round_cap(rounds), oracle_fuel(oracle) {
  if (steps == 0 || rounds == 0 || oracle == 0) throw std::invalid_argument("budget components must be positive");
}

std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Halted: return "halted";
    case OutcomeKind::Frozen: return "frozen";
    case OutcomeKind::Exhausted: return "exhausted";
  }
  return "?";
}

std::string_view to_string(ExhaustReason r) {
  switch (r) {
    case ExhaustReason::StepBudget: return "step_budget";
    case ExhaustReason::RoundCap: return "round_cap";
    case ExhaustReason::OracleBudget: return "oracle_budget";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// compiled form: registers remapped to dense slots, labels saturated

struct CInstr {
  Op op = Op::Nop;
  std::array<std::uint32_t, 4> s{};
  std::size_t target = 0;
  Nat k;
};

class CompiledProgram {
 public:
  std::vector<CInstr> code;
  std::size_t slots = 3;
  bool needs_round = false;
  bool has_halt = false;  // without a HALT nothing is ever queried or output
};

CompiledPtr compile(const Program& p) {
  auto cp = std::make_shared<CompiledProgram>();
  std::map<Nat, std::uint32_t> slot_of{{0, 0}, {1, 1}, {2, 2}};
  std::size_t len = p.code.size();
  cp->code.reserve(len);
  for (const auto& ins : p.code) {
    CInstr c;
    c.op = ins.op;
    if (ins.op == Op::Halt) cp->has_halt = true;
    auto kinds = operand_kinds(ins.op);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      switch (kinds[i]) {
        case Slot::Reg: {
          if (ins.arg[i] == 1) cp->needs_round = true;
          auto [it, fresh] = slot_of.try_emplace(ins.arg[i], static_cast<std::uint32_t>(slot_of.size()));
          c.s[i] = it->second;
          break;
        }
        case Slot::Label:
          c.target = ins.arg[i] >= len ? len : static_cast<std::size_t>(ins.arg[i]);
          break;
        case Slot::Const: c.k = ins.arg[i]; break;
      }
    }
    cp->code.push_back(std::move(c));
  }
  cp->slots = slot_of.size();
  return cp;
}

CompiledPtr compile_index(const Nat& index) {
  thread_local std::map<Nat, CompiledPtr> cache;
  if (auto it = cache.find(index); it != cache.end()) return it->second;
  if (cache.size() >= 4096) cache.clear();
  auto cp = compile(decode(index));
  cache.emplace(index, cp);
  return cp;
}

// ---------------------------------------------------------------------------
// interpreter

namespace {

constexpr std::size_t kMaxDepth = 1u << 16;

bool too_big(const Nat& x) { return x != 0 && boost::multiprecision::msb(x) >= kMaxRegisterBits; }

struct Frame {
  CompiledPtr prog;
  std::vector<Nat> regs;
  std::size_t pc = 0;
  std::uint32_t ret_slot = 0;
  // Brent cycle detection
  std::vector<Nat> snap;
  std::size_t snap_pc = 0;
  std::uint64_t power = 1, lam = 0;
};

Frame make_frame(CompiledPtr prog, Nat x, const Nat* round, Nat list, std::uint32_t ret) {
  Frame f;
  f.regs.resize(prog->slots);
  f.regs[0] = std::move(x);
  if (prog->needs_round) f.regs[1] = round ? *round : Nat(seq_length(list));
  f.regs[2] = std::move(list);
  f.ret_slot = ret;
  f.snap = f.regs;
  f.prog = std::move(prog);
  return f;
}

// true when the frame's current configuration closes a cycle
bool brent(Frame& f) {
  if (f.pc == f.snap_pc && f.regs == f.snap) return true;
  if (++f.lam == f.power) {
    f.snap = f.regs;
    f.snap_pc = f.pc;
    f.power *= 2;
    f.lam = 0;
  }
  return false;
}

enum class Mode { Brent, Memo };

StepResult execute(CompiledPtr root, const Nat& n, const Nat& round, const Nat& list, std::uint64_t fuel, Mode mode,
                   std::size_t memo_cap) {
  StepResult res;
  std::vector<Frame> stack;
  stack.push_back(make_frame(std::move(root), n, &round, list, 0));
  std::set<std::pair<std::size_t, std::vector<Nat>>> memo;
  if (mode == Mode::Memo) memo.emplace(0, stack.back().regs);
  std::uint64_t steps = 0;

  auto finish = [&](StepResult::Kind k) {
    res.kind = k;
    res.steps = steps;
    return res;
  };

  for (;;) {
    Frame& f = stack.back();
    const auto& code = f.prog->code;
    // falling off the end is a stuck configuration
    if (f.pc >= code.size()) return finish(StepResult::Kind::CertifiedDivergent);
    if (steps >= fuel) return finish(StepResult::Kind::Exhausted);
    ++steps;
    const CInstr& in = code[f.pc];
    auto& r = f.regs;
    switch (in.op) {
      case Op::Nop: ++f.pc; break;
      case Op::Inc:
        ++r[in.s[0]];
        ++f.pc;
        break;
      case Op::Decj:
        if (r[in.s[0]] == 0) {
          f.pc = in.target;
        } else {
          --r[in.s[0]];
          ++f.pc;
        }
        break;
      case Op::Jmp: f.pc = in.target; break;
      case Op::Halt: {
        Nat v = r[in.s[0]];
        if (stack.size() == 1) {
          auto hp = split_halt_output(v);
          res.bit = hp.bit;
          res.payload = std::move(hp.payload);
          return finish(StepResult::Kind::HaltPair);
        }
        std::uint32_t slot = f.ret_slot;
        stack.pop_back();
        stack.back().regs[slot] = std::move(v);
        ++stack.back().pc;
        break;
      }
      case Op::Set:
        r[in.s[0]] = in.k;
        ++f.pc;
        break;
      case Op::Add:
        r[in.s[0]] = r[in.s[1]] + r[in.s[2]];
        if (too_big(r[in.s[0]])) return finish(StepResult::Kind::Exhausted);
        ++f.pc;
        break;
      case Op::Pair:
        r[in.s[0]] = cantor_pair(r[in.s[1]], r[in.s[2]]);
        if (too_big(r[in.s[0]])) return finish(StepResult::Kind::Exhausted);
        ++f.pc;
        break;
      case Op::Unpair: {
        auto [x, y] = cantor_unpair(r[in.s[2]]);
        r[in.s[0]] = std::move(x);
        r[in.s[1]] = std::move(y);
        ++f.pc;
        break;
      }
      case Op::Jeq: f.pc = r[in.s[0]] == r[in.s[1]] ? in.target : f.pc + 1; break;
      case Op::Halve: {
        Nat s = r[in.s[2]];
        r[in.s[0]] = s >> 1;
        r[in.s[1]] = bit_test(s, 0) ? 1 : 0;
        ++f.pc;
        break;
      }
      case Op::Nth:
        r[in.s[0]] = seq_nth(r[in.s[1]], r[in.s[2]]);
        ++f.pc;
        break;
      case Op::Snoc:
        r[in.s[0]] = seq_snoc(r[in.s[1]], r[in.s[2]]);
        if (too_big(r[in.s[0]])) return finish(StepResult::Kind::Exhausted);
        ++f.pc;
        break;
      case Op::Sim: {
        if (stack.size() >= kMaxDepth) return finish(StepResult::Kind::Exhausted);
        auto child = compile_index(r[in.s[1]]);
        Nat x = r[in.s[2]];
        Nat l = r[in.s[3]];
        std::uint32_t slot = in.s[0];
        stack.push_back(make_frame(std::move(child), std::move(x), nullptr, std::move(l), slot));
        continue;  // the caller's transition completes on return
      }
    }
    Frame& top = stack.back();
    if (mode == Mode::Memo && stack.size() == 1) {
      if (!memo.emplace(top.pc, top.regs).second) return finish(StepResult::Kind::CertifiedDivergent);
      if (memo.size() > memo_cap) return finish(StepResult::Kind::Exhausted);
    } else if (brent(top)) {
      return finish(StepResult::Kind::CertifiedDivergent);
    }
  }
}

}  // namespace

StepResult step_functional(const CompiledProgram& p, const Nat& n, std::span<const Nat> answers,
                           std::uint64_t fuel) {
  std::vector<Nat> as(answers.begin(), answers.end());
  // aliasing constructor: no ownership taken
  CompiledPtr ptr(std::shared_ptr<const CompiledProgram>{}, &p);
  return execute(ptr, n, Nat(answers.size()), seq_encode(as), fuel, Mode::Brent, 0);
}

StepResult step_functional(const Program& p, const Nat& n, std::span<const Nat> answers, std::uint64_t fuel) {
  return step_functional(*compile(p), n, answers, fuel);
}

DialogueOutcome run_dialogue(const CompiledProgram& p, const Oracle& g, const Nat& n, const Budget& b) {
  CompiledPtr ptr(std::shared_ptr<const CompiledProgram>{}, &p);
  DialogueOutcome out;
  Nat list = 0;
  std::uint64_t remaining = b.step_fuel;
  for (;;) {
    StepResult r = execute(ptr, n, Nat(out.trace.size()), list, remaining, Mode::Brent, 0);
    out.steps += r.steps;
    remaining -= r.steps;
    switch (r.kind) {
      case StepResult::Kind::Exhausted:
        out.kind = OutcomeKind::Exhausted;
        out.reason = ExhaustReason::StepBudget;
        out.divergence_certified = !p.has_halt;
        return out;
      case StepResult::Kind::CertifiedDivergent:
        out.kind = OutcomeKind::Exhausted;
        out.reason = ExhaustReason::StepBudget;
        out.divergence_certified = true;
        return out;
      case StepResult::Kind::HaltPair: break;
    }
    if (r.bit == 1) {
      out.kind = OutcomeKind::Halted;
      out.value = std::move(r.payload);
      return out;
    }
    if (out.trace.size() >= b.round_cap) {
      out.kind = OutcomeKind::Exhausted;
      out.reason = ExhaustReason::RoundCap;
      return out;
    }
    OracleAnswer a = g.eval(r.payload, b.oracle_fuel);
    switch (a.kind) {
      case OracleAnswer::Kind::Undefined:
        out.kind = OutcomeKind::Frozen;
        out.value = std::move(r.payload);
        return out;
      case OracleAnswer::Kind::Unknown:
        out.kind = OutcomeKind::Exhausted;
        out.reason = ExhaustReason::OracleBudget;
        return out;
      case OracleAnswer::Kind::Defined: break;
    }
    list = seq_snoc(list, a.value);
    out.trace.emplace_back(std::move(r.payload), std::move(a.value));
  }
}

DialogueOutcome run_dialogue(const Program& p, const Oracle& g, const Nat& n, const Budget& b) {
  return run_dialogue(*compile(p), g, n, b);
}

DialogueOutcome apply_pca(const Nat& e, const Nat& n, const Oracle& f, const Budget& b) {
  return run_dialogue(*compile_index(e), f, n, b);
}

DivergenceVerdict certify_divergence(const Program& p, const Nat& n, std::span<const Nat> answers,
                                     std::size_t memo_cap) {
  std::vector<Nat> as(answers.begin(), answers.end());
  // nested simulations get a generous but finite allowance
  std::uint64_t fuel = static_cast<std::uint64_t>(memo_cap) * 64 + 1024;
  StepResult r = execute(compile(p), n, Nat(as.size()), seq_encode(as), fuel, Mode::Memo, memo_cap);
  return r.kind == StepResult::Kind::CertifiedDivergent ? DivergenceVerdict::CertifiedDivergent
                                                        : DivergenceVerdict::Unknown;
}

Nat pad(const Nat& e, const Nat& k) {
  // appending one NOP maps index c to 3c+1 (and the empty program 0 to 1)
  Nat d = e;
  while (d < k) d = d == 0 ? Nat(1) : 3 * d + 1;
  return d;
}

// ---------------------------------------------------------------------------
// composition

namespace {

Program compose_impl(const Program& p, const Program& q, const Nat* fixed_input) {
  using B = ProgramBuilder;
  B b;
  B::Reg P = b.fresh(), Q = b.fresh(), N = b.fresh(), PL = b.fresh(), K = b.fresh(), QL = b.fresh();
  B::Reg V = b.fresh(), QV = b.fresh(), Bit = b.fresh(), One = b.fresh(), W = b.fresh(), WP = b.fresh(),
         A = b.fresh();
  auto outer = b.label(), inner = b.label(), ask = b.label(), emit = b.label(), done = b.label();

  b.set(P, encode(p));
  b.set(Q, encode(q));
  if (fixed_input) b.set(N, *fixed_input);
  else b.copy(N, kRegInput);
  b.set(One, 1);
  // PL: answers fed to p so far; K: h-answers consumed so far
  b.bind(outer);
  b.sim(V, P, N, PL);
  b.halve(QV, Bit, V);
  b.jeq(Bit, One, done);
  b.set(QL, 0);
  // evaluate q on p's query QV against h
  b.bind(inner);
  b.sim(W, Q, QV, QL);
  b.halve(WP, Bit, W);
  b.jeq(Bit, B::kZero, ask);
  b.snoc(PL, PL, WP);
  b.jmp(outer);
  b.bind(ask);
  b.jeq(K, kRegRound, emit);
  b.nth(A, kRegAnswers, K);
  b.inc(K);
  b.snoc(QL, QL, A);
  b.jmp(inner);
  b.bind(emit);
  b.halt(W);
  b.bind(done);
  b.halt(V);
  return b.build();
}

}  // namespace

Program compose(const Program& p, const Program& q) { return compose_impl(p, q, nullptr); }

Program compose_at(const Program& p, const Program& q, const Nat& fixed_input) {
  return compose_impl(p, q, &fixed_input);
}

// ---------------------------------------------------------------------------
// assembler

ProgramBuilder::Label ProgramBuilder::label() {
  labels_.push_back(-1);
  return labels_.size() - 1;
}

void ProgramBuilder::bind(Label l) {
  if (labels_.at(l) >= 0) throw std::logic_error("label bound twice");
  labels_[l] = static_cast<std::ptrdiff_t>(code_.size());
}

ProgramBuilder::Reg ProgramBuilder::fresh() { return next_reg_++; }

namespace {
Instruction make(Op op, std::initializer_list<Nat> args) {
  Instruction ins;
  ins.op = op;
  std::size_t i = 0;
  for (const auto& a : args) ins.arg[i++] = a;
  return ins;
}
}  // namespace

void ProgramBuilder::nop() { code_.push_back({make(Op::Nop, {}), -1}); }
void ProgramBuilder::inc(Reg r) { code_.push_back({make(Op::Inc, {r}), -1}); }
void ProgramBuilder::decj(Reg r, Label l) { code_.push_back({make(Op::Decj, {r, l}), 1}); }
void ProgramBuilder::jmp(Label l) { code_.push_back({make(Op::Jmp, {l}), 0}); }
void ProgramBuilder::halt(Reg r) { code_.push_back({make(Op::Halt, {r}), -1}); }
void ProgramBuilder::set(Reg r, const Nat& k) { code_.push_back({make(Op::Set, {r, k}), -1}); }
void ProgramBuilder::add(Reg d, Reg a, Reg b) { code_.push_back({make(Op::Add, {d, a, b}), -1}); }
void ProgramBuilder::pair(Reg d, Reg a, Reg b) { code_.push_back({make(Op::Pair, {d, a, b}), -1}); }
void ProgramBuilder::unpair(Reg d, Reg e, Reg s) { code_.push_back({make(Op::Unpair, {d, e, s}), -1}); }
void ProgramBuilder::jeq(Reg a, Reg b, Label l) { code_.push_back({make(Op::Jeq, {a, b, l}), 2}); }
void ProgramBuilder::halve(Reg d, Reg b, Reg s) { code_.push_back({make(Op::Halve, {d, b, s}), -1}); }
void ProgramBuilder::nth(Reg d, Reg l, Reg k) { code_.push_back({make(Op::Nth, {d, l, k}), -1}); }
void ProgramBuilder::snoc(Reg d, Reg l, Reg x) { code_.push_back({make(Op::Snoc, {d, l, x}), -1}); }
void ProgramBuilder::sim(Reg d, Reg p, Reg x, Reg l) { code_.push_back({make(Op::Sim, {d, p, x, l}), -1}); }

void ProgramBuilder::output(Reg r) {
  Reg t = fresh();
  add(t, r, r);
  inc(t);
  halt(t);
}

void ProgramBuilder::query(Reg r) {
  Reg t = fresh();
  add(t, r, r);
  halt(t);
}

void ProgramBuilder::if_first_round(Label l) { jeq(kRegRound, kZero, l); }

void ProgramBuilder::mul_const(Reg d, Reg s, const Nat& k) {
  Reg acc = fresh(), cur = fresh();
  set(acc, 0);
  copy(cur, s);
  std::size_t top = k == 0 ? 0 : boost::multiprecision::msb(k);
  for (std::size_t i = 0; k != 0 && i <= top; ++i) {
    if (bit_test(k, i)) add(acc, acc, cur);
    if (i < top) add(cur, cur, cur);
  }
  copy(d, acc);
}

Program ProgramBuilder::build() const {
  Program p;
  p.code.reserve(code_.size());
  for (const auto& pend : code_) {
    Instruction ins = pend.ins;
    if (pend.label_slot >= 0) {
      auto id = static_cast<std::size_t>(ins.arg[pend.label_slot]);
      if (labels_.at(id) < 0) throw std::logic_error("unbound label");
      ins.arg[pend.label_slot] = labels_[id];
    }
    p.code.push_back(std::move(ins));
  }
  return p;
}

}  // namespace subt
