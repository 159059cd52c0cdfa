#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subt/nat.hpp"

namespace subt {

// Instruction set. The first five are the classic counter-machine core; the
// rest keep witness programs (which carry other programs' indices as
// constants and simulate them) runnable at desk scale.
enum class Op : std::uint8_t {
  Nop,     // NOP
  Inc,     // INC r
  Decj,    // DECJ r L     if r == 0 jump L, else r -= 1
  Jmp,     // JMP L
  Halt,    // HALT r       output r, read as <i,q> = 2q + i
  Set,     // SET r k
  Add,     // ADD d a b
  Pair,    // PAIR d a b   d := <a,b> (Cantor)
  Unpair,  // UNPAIR d e s (d,e) := Cantor inverse of s
  Jeq,     // JEQ a b L
  Halve,   // HALVE d b s  d := s div 2, b := s mod 2
  Nth,     // NTH d l k    d := k-th element of list l (0 if absent)
  Snoc,    // SNOC d l x   d := list l with x appended
  Sim,     // SIM d p x l  d := raw halt output of program p on (x, list l)
};

inline constexpr std::size_t kOpCount = 14;

std::size_t arity(Op op);
std::string_view mnemonic(Op op);

struct Instruction {
  Op op = Op::Nop;
  std::array<Nat, 4> arg{};

  bool operator==(const Instruction&) const = default;
};

struct Program {
  std::vector<Instruction> code;

  bool operator==(const Program&) const = default;
};

// Registers holding the input tuple when a program is started.
inline constexpr std::uint64_t kRegInput = 0;
inline constexpr std::uint64_t kRegRound = 1;    // number of answers so far
inline constexpr std::uint64_t kRegAnswers = 2;  // list code of the answers

/// A run whose registers outgrow this many bits stops as Exhausted.
inline constexpr std::size_t kMaxRegisterBits = std::size_t{1} << 16;

Nat encode_instruction(const Instruction& ins);
Instruction decode_instruction(const Nat& code);

/// Gödel numbering; a bijection between programs and naturals.
Nat encode(const Program& p);
Program decode(const Nat& n);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One instruction per line, '#' starts a comment.
Program parse_program(std::string_view text);
std::string format_program(const Program& p);

struct Budget {
  std::uint64_t step_fuel;
  std::uint64_t round_cap;
  std::uint64_t oracle_fuel;

  Budget(std::uint64_t steps, std::uint64_t rounds, std::uint64_t oracle);
  bool operator==(const Budget&) const = default;
};

// ---------------------------------------------------------------------------
// Oracles

struct OracleAnswer {
  enum class Kind : std::uint8_t { Defined, Undefined, Unknown };
  Kind kind = Kind::Undefined;
  Nat value = 0;

  static OracleAnswer defined(Nat v) { return {Kind::Defined, std::move(v)}; }
  static OracleAnswer undefined() { return {Kind::Undefined, 0}; }
  static OracleAnswer unknown() { return {Kind::Unknown, 0}; }
  bool operator==(const OracleAnswer&) const = default;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  /// fuel caps any self-evaluation the oracle needs for this one point.
  virtual OracleAnswer eval(const Nat& n, std::uint64_t fuel) const = 0;
};

// ---------------------------------------------------------------------------
// Execution

class CompiledProgram;
using CompiledPtr = std::shared_ptr<const CompiledProgram>;

CompiledPtr compile(const Program& p);
/// Compiles decode(index), memoized per thread.
CompiledPtr compile_index(const Nat& index);

struct StepResult {
  enum class Kind : std::uint8_t { HaltPair, Exhausted, CertifiedDivergent };
  Kind kind = Kind::Exhausted;
  unsigned bit = 0;  // HaltPair: 1 = output, 0 = query
  Nat payload = 0;
  std::uint64_t steps = 0;

  bool operator==(const StepResult&) const = default;
};

/// One application of the program to (n, answers); no oracle involved.
StepResult step_functional(const CompiledProgram& p, const Nat& n, std::span<const Nat> answers,
                           std::uint64_t fuel);
StepResult step_functional(const Program& p, const Nat& n, std::span<const Nat> answers, std::uint64_t fuel);

enum class OutcomeKind : std::uint8_t { Halted, Frozen, Exhausted };
enum class ExhaustReason : std::uint8_t { StepBudget, RoundCap, OracleBudget };

struct DialogueOutcome {
  OutcomeKind kind = OutcomeKind::Exhausted;
  Nat value = 0;  // output when Halted, offending query when Frozen
  ExhaustReason reason = ExhaustReason::StepBudget;
  bool divergence_certified = false;
  std::vector<std::pair<Nat, Nat>> trace;
  std::uint64_t steps = 0;

  bool halted() const { return kind == OutcomeKind::Halted; }
  bool frozen() const { return kind == OutcomeKind::Frozen; }
  bool exhausted() const { return kind == OutcomeKind::Exhausted; }
  /// Halted, Frozen, or certified divergent: stable under larger budgets.
  bool settled() const { return kind != OutcomeKind::Exhausted || divergence_certified; }
  bool operator==(const DialogueOutcome&) const = default;
};

std::string_view to_string(OutcomeKind k);
std::string_view to_string(ExhaustReason r);

/// The sequential oracle protocol: each round re-runs the program on
/// (n, a_0, ..., a_{s-1}); a query outside the oracle's domain freezes.
DialogueOutcome run_dialogue(const CompiledProgram& p, const Oracle& g, const Nat& n, const Budget& b);
DialogueOutcome run_dialogue(const Program& p, const Oracle& g, const Nat& n, const Budget& b);

/// e *_f n in K_1[f].
DialogueOutcome apply_pca(const Nat& e, const Nat& n, const Oracle& f, const Budget& b);

enum class DivergenceVerdict : std::uint8_t { CertifiedDivergent, Unknown };

/// Sound, incomplete: CertifiedDivergent only when a full configuration of
/// the top-level run repeats among the first memo_cap configurations.
DivergenceVerdict certify_divergence(const Program& p, const Nat& n, std::span<const Nat> answers,
                                     std::size_t memo_cap);

/// Least index >= k reachable from e by appending NOPs.
Nat pad(const Nat& e, const Nat& k);

/// r with Phi_r[h] extending Phi_p[Phi_q[h]].
Program compose(const Program& p, const Program& q);

/// As compose, but the composite ignores its input and runs p on fixed_input.
Program compose_at(const Program& p, const Program& q, const Nat& fixed_input);

// ---------------------------------------------------------------------------
// Assembler for hand-written and generated programs.

class ProgramBuilder {
 public:
  using Label = std::size_t;
  using Reg = std::uint64_t;

  // r3 is never written by builder code and serves as a zero constant.
  static constexpr Reg kZero = 3;

  Label label();
  void bind(Label l);
  Reg fresh();

  void nop();
  void inc(Reg r);
  void decj(Reg r, Label l);
  void jmp(Label l);
  void halt(Reg r);
  void set(Reg r, const Nat& k);
  void add(Reg d, Reg a, Reg b);
  void pair(Reg d, Reg a, Reg b);
  void unpair(Reg d, Reg e, Reg s);
  void jeq(Reg a, Reg b, Label l);
  void halve(Reg d, Reg b, Reg s);
  void nth(Reg d, Reg l, Reg k);
  void snoc(Reg d, Reg l, Reg x);
  void sim(Reg d, Reg p, Reg x, Reg l);

  void copy(Reg d, Reg s) { add(d, s, kZero); }
  /// Halts with output value r (emits 2r+1).
  void output(Reg r);
  /// Halts with query r (emits 2r).
  void query(Reg r);
  /// Jumps to l when no answers have been received yet.
  void if_first_round(Label l);
  /// d := k * s for a constant k (shift-and-add).
  void mul_const(Reg d, Reg s, const Nat& k);

  Program build() const;

 private:
  struct Pending {
    Instruction ins;
    int label_slot = -1;  // operand slot holding a label id
  };
  std::vector<Pending> code_;
  std::vector<std::ptrdiff_t> labels_;
  Reg next_reg_ = 4;
};

}  // namespace subt
