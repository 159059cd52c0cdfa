#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "subt/json.hpp"
#include "subt/machine.hpp"

namespace subt {

enum class PFKind : std::uint8_t {
  Table,
  TotalByProgram,
  Restriction,
  Join,
  Meet,
  Graph,
  Jump,      // lazy K(f) or K0(f)
  Computed,  // lazy Phi_e[g]
  Ref,       // named handle, serialized by name only
};

enum class JumpVariant : std::uint8_t { K, K0 };

/// Immutable partial function with a three-way evaluation interface.
/// Copies share structure.
class PartialFn final : public Oracle {
 public:
  struct Node;

  PartialFn();  // the empty function
  static PartialFn table(std::map<Nat, Nat> entries);
  /// Pre-runs the program (empty oracle) on 0..range-1; the certified range is
  /// the longest prefix on which it halts within per_input_fuel.
  static PartialFn total_by_program(const Nat& index, std::uint64_t per_input_fuel, std::uint64_t range);
  static PartialFn restrict(const PartialFn& f, std::set<Nat> domain);
  /// Domain {n : predicate program outputs nonzero on n}.
  static PartialFn restrict_pred(const PartialFn& f, const Nat& predicate, std::uint64_t fuel);
  static PartialFn join(const PartialFn& f, const PartialFn& g);
  static PartialFn meet(const PartialFn& f, const PartialFn& g, const Budget& b);
  static PartialFn graph(const PartialFn& f);
  static PartialFn jump(const PartialFn& f, const Budget& b, JumpVariant v = JumpVariant::K);
  static PartialFn computed(const Nat& index, const PartialFn& base, const Budget& b);
  static PartialFn ref(std::string name, const PartialFn& target);

  OracleAnswer eval(const Nat& n, std::uint64_t fuel) const override;
  OracleAnswer eval(const Nat& n) const { return eval(n, 1'000'000); }

  PFKind kind() const;
  /// Entries of a Table; empty for other kinds.
  const std::map<Nat, Nat>& entries() const;
  /// Certified range of a TotalByProgram.
  std::uint64_t certified_range() const;

  /// Tagged-union JSON. Refs serialize as {"kind":"ref","name":...}.
  Json to_json() const;
  static PartialFn from_json(const Json& j, const std::map<std::string, PartialFn>& refs = {});

 private:
  explicit PartialFn(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Jump operators

struct JumpAnswer {
  enum class Kind : std::uint8_t { One, ZeroCertified, UndefinedFrozen, Unknown };
  Kind kind = Kind::Unknown;
  Nat query = 0;                                      // UndefinedFrozen
  ExhaustReason reason = ExhaustReason::StepBudget;  // Unknown
  bool k0_zero = false;  // K0 reads a freeze as 0; set when that collapse happened

  bool operator==(const JumpAnswer&) const = default;
};

std::string_view to_string(JumpAnswer::Kind k);

JumpAnswer k_jump(const Oracle& f, const Nat& e, const Budget& b);
JumpAnswer k0(const Oracle& f, const Nat& e, const Budget& b);

// ---------------------------------------------------------------------------
// Witness programs

/// Round 0 queries the input, round 1 outputs the answer.
Program echo_program();
/// Outputs v on every input.
Program constant_program(const Nat& v);
/// Jumps to itself.
Program self_loop_program();

struct NamedProgram {
  std::string name;
  Program program;
};

/// W_graph_fwd, W_graph_bwd, W_join_left, W_join_right, W_meet_left,
/// W_meet_right, echo.
std::vector<NamedProgram> canonical_witnesses();
const Program& witness(std::string_view name);

/// Reduces h to meet(f,g) given d: h <= f and e: h <= g.
Program meet_universality(const Nat& d, const Nat& e);

/// Reduces f (+) g to h given p: f <= h and q: g <= h.
Program join_witness(const Nat& p, const Nat& q);

/// Empty-oracle program computing a finite table; diverges off its domain.
Program table_program(const std::map<Nat, Nat>& f);

/// i(n): on any input, outputs f(n).
Nat inflation_index(const Nat& n);

/// b(d,e): on any input, runs Phi_e over Phi_d[g] at input e.
Nat monotone_transfer(const Nat& d, const Nat& e);

/// d(n): queries n, then halts with 0 whatever the answer.
Nat domain_probe_index(const Nat& n);

/// Probe for <n,m>: queries n, halts if the answer is m, otherwise loops.
Program graph_probe_program(const Nat& c);

/// f <= K(f) in one index: for m = 0,1,... ask K at probe(<n,m>) until 1.
/// Probe indices are computed in-machine.
Program jump_inflation_witness();

/// Probe index arithmetic exactly as the witness program performs it.
Nat graph_probe_index_formula(const Nat& c);

/// chi_dom(f) <= K0(f): query K0 at d(n), output the answer.
Program domain_via_k0_witness();

}  // namespace subt
