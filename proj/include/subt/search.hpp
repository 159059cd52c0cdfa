#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "subt/json.hpp"
#include "subt/partialfn.hpp"

namespace subt {

enum class Verdict : std::uint8_t { Witnessed, Refuted, Inconclusive };
std::string_view to_string(Verdict v);

/// Result of checking one program as a witness of f <= g on a finite grid.
struct VerifyReport {
  Verdict verdict = Verdict::Inconclusive;
  Nat index = 0;
  std::vector<Nat> domain;
  Budget budget{1, 1, 1};
  std::map<Nat, DialogueOutcome> outcomes;  // required inputs that were run
  std::optional<Nat> counterexample;        // first refuting (or unknown) input
  std::string detail;
};

/// Checks f(n) = Phi_p[g](n) for n in D with f(n) defined, in ascending n.
/// A wrong value, a freeze or certified divergence refutes; budget
/// exhaustion or an Unknown answer from f leaves the verdict inconclusive.
VerifyReport verify_reduction(const Program& p, const PartialFn& f, const PartialFn& g, const std::vector<Nat>& D,
                              const Budget& b);
VerifyReport verify_reduction_index(const Nat& e, const PartialFn& f, const PartialFn& g, const std::vector<Nat>& D,
                                    const Budget& b);

struct IndexFailure {
  Nat index;
  Nat input;
  DialogueOutcome outcome;
  bool unknown = false;
};

/// Refutes only "a witness of index <= index_bound at this budget on D".
struct NonReductionCertificate {
  Nat index_bound = 0;
  std::vector<Nat> domain;
  Budget budget{1, 1, 1};
  std::vector<IndexFailure> failures;  // ascending index
  std::size_t unknown_count = 0;

  bool exact() const { return unknown_count == 0; }
};

struct SearchResult {
  std::optional<VerifyReport> witness;  // least witnessing index
  NonReductionCertificate certificate;  // failures below the witness, or all

  bool found() const { return witness.has_value(); }
};

SearchResult search_reduction_serial(const PartialFn& f, const PartialFn& g, const Nat& index_bound,
                                     const std::vector<Nat>& D, const Budget& b);
/// OpenMP over index blocks; same result as the serial version.
SearchResult search_reduction(const PartialFn& f, const PartialFn& g, const Nat& index_bound,
                              const std::vector<Nat>& D, const Budget& b);

enum class QuerySide : std::uint8_t { All, Even, Odd };

struct QueryTrace {
  std::map<Nat, std::set<Nat>> per_input;
  std::set<Nat> all;  // union over inputs in dom(of_interest) when given
};

/// Answered queries of run_dialogue(p, g, n, b). Even keeps even queries as
/// q/2, Odd keeps odd queries as (q-1)/2.
QueryTrace trace_queries(const Program& p, const PartialFn& g, const std::vector<Nat>& D, const Budget& b,
                         QuerySide side = QuerySide::All, const PartialFn* of_interest = nullptr);

/// {n <= input_bound : Phi_e[f](n) halts within b}, dovetailed with doubling fuel.
std::set<Nat> ce_enumerate_serial(const Nat& e, const PartialFn& f, std::uint64_t input_bound, const Budget& b);
std::set<Nat> ce_enumerate(const Nat& e, const PartialFn& f, std::uint64_t input_bound, const Budget& b);

struct EquivalenceReport {
  SearchResult forward;   // f <= g
  SearchResult backward;  // g <= f
  bool equivalent() const { return forward.found() && backward.found(); }
};

EquivalenceReport check_equivalence(const PartialFn& f, const PartialFn& g, const Nat& index_bound,
                                    const std::vector<Nat>& D, const Budget& b);

/// Over an oracle z: even z = 2m is answered from the finite table, odd
/// z = 2m+1 is forwarded to the oracle as the query m.
Program table_join_program(const std::map<Nat, Nat>& table);

struct AntiCuppingReplay {
  VerifyReport original;    // p : g <= (f|A) + beta
  std::set<Nat> f_queries;  // Q
  VerifyReport restricted;  // p : g <= (f|(A n Q)) + beta
  Program derived;          // hard-codes f|(A n Q)
  VerifyReport beta_only;   // derived : g <= beta
};

AntiCuppingReplay anti_cupping_replay(const Program& p, const PartialFn& g, const PartialFn& f,
                                      const std::set<Nat>& A, const PartialFn& beta, const std::vector<Nat>& D,
                                      const Budget& b);

Json verify_json(const VerifyReport& r);
Json certificate_json(const NonReductionCertificate& c);
Json search_json(const SearchResult& r);

std::vector<Nat> range_domain(std::uint64_t lo, std::uint64_t hi);  // [lo, hi)

}  // namespace subt
