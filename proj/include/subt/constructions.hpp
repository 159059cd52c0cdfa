#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subt/certificate.hpp"

namespace subt {

struct ConstructionConfig {
  std::uint64_t E = 4;         // requirements e = 0..E
  std::vector<Nat> indices;    // requirement programs; empty means 0..E
  Budget budget{2000, 32, 1'000'000};
  std::uint64_t grid = 64;         // searches for points range over [0, grid)
  std::uint64_t index_bound = 64;  // hypothesis searches
  std::uint64_t k = 2;             // antichain depth: strings in 2^k
  std::uint64_t extension = 2;     // antichain: |rho| - u at most this
  std::uint64_t input_bound = 8;   // "for some n" questions range over [0, input_bound)
  std::uint64_t rounds = 16;       // nondistributive round cap

  std::vector<Nat> requirements() const;
  Json to_json() const;
  static ConstructionConfig from_json(const Json& j);
};

/// A subset of dom(f) with f|A noncomputable and f-immune, at the bounds.
/// Sets "A" (diagonalization points) and "excluded"; functions f, fA.
Transcript build_quasiminimal(const PartialFn& f, const ConstructionConfig& c);

/// h = (f|A) + g strictly between g and f at the bounds.
Transcript build_density(const PartialFn& f, const PartialFn& g, const ConstructionConfig& c);

/// Sets A_s for s in 2^k, pairwise exclusion certificates; functions h_s.
Transcript build_antichain(const PartialFn& f, const PartialFn& g, const ConstructionConfig& c);

/// f with f(a_k) = h(k); params "a" lists the coding locations.
Transcript build_jump_inversion(const PartialFn& h, const ConstructionConfig& c);

/// f(<a_n, x>) = g_n(x) for x < grid, with h not below f at the bounds.
Transcript spoil_supremum(const std::vector<PartialFn>& gs, const PartialFn& h, const ConstructionConfig& c);

/// f(a_n) = g*_n(a_n) for the iterated meets g*_n, with f not below h.
Transcript spoil_infimum(const std::vector<PartialFn>& gs, const PartialFn& h, const ConstructionConfig& c);

/// Input of g*_n used by spoil_infimum: <lift_{n-1}, echo, x>, where lift_m
/// asks g*_m at its own tuple for x. For n = 0 it is x itself.
Nat meet_fold_point(std::size_t n, const Nat& x);
/// Iterated meet g*_n = (..(g_0 n g_1) n ..) n g_n with budget b.
PartialFn meet_fold(const std::vector<PartialFn>& gs, std::size_t n, const Budget& b);

// ---------------------------------------------------------------------------
// Nondistributivity. f takes level-t inputs <t,i,j> with i,j < 2; g, h
// are 0/1 valued. Requirement e is attacked at level n.

struct NondistributiveState {
  std::map<Nat, Nat> f, g, h;
  Nat n = 0;
};

/// Psi_n[f+g](x) = f(n, g(n), 0) and Gamma_n[f+h](x) = f(n, h(n), 1).
Program psi_program(const Nat& n);
Program gamma_program(const Nat& n);
Nat level_input(const Nat& t, unsigned i, unsigned j);

/// One stage. Evidence names "f", "g", "h" and is filled in by finalize().
StageCertificate nondistributive_strategy(const Nat& e, NondistributiveState& s, const ConstructionConfig& c,
                                          BoundedHaltingOracle& oracle);
/// Stages for each requirement program; functions f, g, h.
Transcript build_nondistributive(const ConstructionConfig& c);

// ---------------------------------------------------------------------------
// Requirement programs for the bundled scenarios. Small indices are mostly
// programs that never query, which makes every stage trivial.

/// Queries scale*n + offset; outputs 0 if the answer is nonzero, else loops.
Program affine_probe_program(const Nat& scale, const Nat& offset);
/// Queries q and outputs the answer.
Program ask_program(const Nat& q);
/// Queries q and outputs v.
Program ask_then_output_program(const Nat& q, const Nat& v);
/// Queries q; answer 0 outputs 0, otherwise queries *on_one and outputs that
/// answer, or loops when on_one is empty.
Program ask_branch_program(const Nat& q, const std::optional<Nat>& on_one);
/// Queries q in every round.
Program ask_forever_program(const Nat& q);
/// Raw query for <a,b,y> on the right of f + (g n h).
Nat meet_query_point(const Nat& a, const Nat& b, const Nat& y);

// ---------------------------------------------------------------------------

struct SuiteReport {
  std::string strategy;
  std::uint64_t stages = 0;
  std::uint64_t satisfied = 0, inconclusive = 0, presumed = 0, violated = 0;
  std::uint64_t replay_failures = 0;
  Transcript transcript;

  Json to_json() const;
};

std::vector<std::string> construction_names();
/// Built-in inputs for a construction, run with c.
Transcript run_bundled(std::string_view name, const ConstructionConfig& c);
/// Defaults used by the acceptance scenarios for each construction.
ConstructionConfig bundled_config(std::string_view name);
/// Runs the named construction on stages e < E and replays the result.
SuiteReport run_requirement_suite(std::string_view name, std::uint64_t E, const ConstructionConfig& c);

}  // namespace subt
