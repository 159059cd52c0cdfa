#include "subt/search.hpp"

#include <algorithm>

#include <omp.h>

namespace subt {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Witnessed: return "witnessed";
    case Verdict::Refuted: return "refuted";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<Nat> range_domain(std::uint64_t lo, std::uint64_t hi) {
  std::vector<Nat> d;
  for (std::uint64_t n = lo; n < hi; ++n) d.emplace_back(n);
  return d;
}

namespace {

VerifyReport verify_compiled(const CompiledProgram& p, const Nat& index, const PartialFn& f, const PartialFn& g,
                             const std::vector<Nat>& D, const Budget& b) {
  VerifyReport r;
  r.index = index;
  r.domain = D;
  r.budget = b;
  std::vector<Nat> sorted = D;
  std::sort(sorted.begin(), sorted.end());
  std::optional<Nat> first_unknown;
  std::string unknown_detail;
  for (const Nat& n : sorted) {
    auto want = f.eval(n, b.oracle_fuel);
    if (want.kind == OracleAnswer::Kind::Undefined) continue;
    if (want.kind == OracleAnswer::Kind::Unknown) {
      if (!first_unknown) {
        first_unknown = n;
        unknown_detail = "f(" + to_string(n) + ") unknown at this budget";
      }
      continue;
    }
    auto o = run_dialogue(p, g, n, b);
    bool bad = (o.halted() && o.value != want.value) || o.frozen() || o.divergence_certified;
    std::string detail;
    if (o.halted() && o.value != want.value)
      detail = "halted with " + to_string(o.value) + ", expected " + to_string(want.value);
    else if (o.frozen())
      detail = "froze at query " + to_string(o.value);
    else if (o.divergence_certified)
      detail = "certified divergent, expected " + to_string(want.value);
    r.outcomes.emplace(n, std::move(o));
    if (bad) {
      r.verdict = Verdict::Refuted;
      r.counterexample = n;
      r.detail = detail;
      return r;
    }
    if (!r.outcomes.at(n).halted() && !first_unknown) {
      first_unknown = n;
      unknown_detail = "exhausted (" + std::string(to_string(r.outcomes.at(n).reason)) + ")";
    }
  }
  if (first_unknown) {
    r.verdict = Verdict::Inconclusive;
    r.counterexample = first_unknown;
    r.detail = unknown_detail;
  } else {
    r.verdict = Verdict::Witnessed;
  }
  return r;
}

void record_failure(NonReductionCertificate& c, const VerifyReport& r) {
  IndexFailure fail;
  fail.index = r.index;
  fail.unknown = r.verdict == Verdict::Inconclusive;
  if (r.counterexample) {
    fail.input = *r.counterexample;
    if (auto it = r.outcomes.find(*r.counterexample); it != r.outcomes.end()) fail.outcome = it->second;
  }
  if (fail.unknown) ++c.unknown_count;
  c.failures.push_back(std::move(fail));
}

NonReductionCertificate empty_certificate(const Nat& bound, const std::vector<Nat>& D, const Budget& b) {
  NonReductionCertificate c;
  c.index_bound = bound;
  c.domain = D;
  c.budget = b;
  return c;
}

}  // namespace

VerifyReport verify_reduction(const Program& p, const PartialFn& f, const PartialFn& g, const std::vector<Nat>& D,
                              const Budget& b) {
  return verify_compiled(*compile(p), encode(p), f, g, D, b);
}

VerifyReport verify_reduction_index(const Nat& e, const PartialFn& f, const PartialFn& g, const std::vector<Nat>& D,
                                    const Budget& b) {
  return verify_compiled(*compile_index(e), e, f, g, D, b);
}

SearchResult search_reduction_serial(const PartialFn& f, const PartialFn& g, const Nat& index_bound,
                                     const std::vector<Nat>& D, const Budget& b) {
  SearchResult res;
  res.certificate = empty_certificate(index_bound, D, b);
  for (Nat e = 0; e <= index_bound; ++e) {
    auto r = verify_reduction_index(e, f, g, D, b);
    if (r.verdict == Verdict::Witnessed) {
      res.witness = std::move(r);
      return res;
    }
    record_failure(res.certificate, r);
  }
  return res;
}

SearchResult search_reduction(const PartialFn& f, const PartialFn& g, const Nat& index_bound,
                              const std::vector<Nat>& D, const Budget& b) {
  SearchResult res;
  res.certificate = empty_certificate(index_bound, D, b);
  const std::int64_t block = 256;
  for (Nat base = 0; base <= index_bound; base += block) {
    Nat left = index_bound - base + 1;
    std::int64_t len = left < block ? static_cast<std::int64_t>(left) : block;
    std::vector<VerifyReport> reports(static_cast<std::size_t>(len));
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < len; ++i)
      reports[static_cast<std::size_t>(i)] = verify_reduction_index(base + i, f, g, D, b);
    // merge in index order so the least witness wins
    for (auto& r : reports) {
      if (r.verdict == Verdict::Witnessed) {
        res.witness = std::move(r);
        return res;
      }
      record_failure(res.certificate, r);
    }
  }
  return res;
}

QueryTrace trace_queries(const Program& p, const PartialFn& g, const std::vector<Nat>& D, const Budget& b,
                         QuerySide side, const PartialFn* of_interest) {
  QueryTrace t;
  auto cp = compile(p);
  for (const Nat& n : D) {
    auto o = run_dialogue(*cp, g, n, b);
    auto& qs = t.per_input[n];
    for (const auto& [q, a] : o.trace) {
      bool odd = bit_test(q, 0);
      if (side == QuerySide::All) qs.insert(q);
      else if (side == QuerySide::Even && !odd) qs.insert(q >> 1);
      else if (side == QuerySide::Odd && odd) qs.insert(q >> 1);
    }
    if (!of_interest || of_interest->eval(n).kind == OracleAnswer::Kind::Defined) t.all.insert(qs.begin(), qs.end());
  }
  return t;
}

namespace {

enum class CeState : std::uint8_t { Pending, Member, Out };

// one dovetailing slice for input n
CeState ce_slice(const CompiledProgram& p, const PartialFn& f, std::uint64_t n, std::uint64_t slice, const Budget& b) {
  auto o = run_dialogue(p, f, n, Budget(slice, b.round_cap, b.oracle_fuel));
  if (o.halted()) return CeState::Member;
  if (o.frozen() || o.divergence_certified) return CeState::Out;
  if (o.reason != ExhaustReason::StepBudget || slice >= b.step_fuel) return CeState::Out;
  return CeState::Pending;
}

std::uint64_t next_slice(std::uint64_t slice, std::uint64_t cap) { return slice >= cap / 2 ? cap : slice * 2; }

}  // namespace

std::set<Nat> ce_enumerate_serial(const Nat& e, const PartialFn& f, std::uint64_t input_bound, const Budget& b) {
  auto p = compile_index(e);
  std::vector<CeState> st(input_bound + 1, CeState::Pending);
  for (std::uint64_t slice = std::min<std::uint64_t>(16, b.step_fuel);; slice = next_slice(slice, b.step_fuel)) {
    bool pending = false;
    for (std::uint64_t n = 0; n <= input_bound; ++n) {
      if (st[n] != CeState::Pending) continue;
      st[n] = ce_slice(*p, f, n, slice, b);
      pending |= st[n] == CeState::Pending;
    }
    if (!pending || slice >= b.step_fuel) break;
  }
  std::set<Nat> out;
  for (std::uint64_t n = 0; n <= input_bound; ++n)
    if (st[n] == CeState::Member) out.insert(n);
  return out;
}

std::set<Nat> ce_enumerate(const Nat& e, const PartialFn& f, std::uint64_t input_bound, const Budget& b) {
  std::vector<CeState> st(input_bound + 1, CeState::Pending);
  const auto len = static_cast<std::int64_t>(input_bound + 1);
  for (std::uint64_t slice = std::min<std::uint64_t>(16, b.step_fuel);; slice = next_slice(slice, b.step_fuel)) {
    int pending = 0;
#pragma omp parallel for schedule(dynamic, 8) reduction(| : pending)
    for (std::int64_t i = 0; i < len; ++i) {
      auto n = static_cast<std::size_t>(i);
      if (st[n] != CeState::Pending) continue;
      st[n] = ce_slice(*compile_index(e), f, n, slice, b);
      pending |= st[n] == CeState::Pending;
    }
    if (!pending || slice >= b.step_fuel) break;
  }
  std::set<Nat> out;
  for (std::uint64_t n = 0; n <= input_bound; ++n)
    if (st[n] == CeState::Member) out.insert(n);
  return out;
}

EquivalenceReport check_equivalence(const PartialFn& f, const PartialFn& g, const Nat& index_bound,
                                    const std::vector<Nat>& D, const Budget& b) {
  return {search_reduction(f, g, index_bound, D, b), search_reduction(g, f, index_bound, D, b)};
}

Program table_join_program(const std::map<Nat, Nat>& table) {
  using B = ProgramBuilder;
  B b;
  auto m = b.fresh(), bit = b.fresh(), k = b.fresh(), v = b.fresh(), a = b.fresh();
  auto odd = b.label(), loop = b.label(), ask = b.label();
  b.halve(m, bit, kRegInput);
  b.jeq(bit, B::kZero, loop);
  // odd side: forward m to the oracle
  b.bind(odd);
  b.if_first_round(ask);
  b.nth(a, kRegAnswers, B::kZero);
  b.output(a);
  b.bind(ask);
  b.query(m);
  // even side: table lookup, loop off the table
  b.bind(loop);
  std::vector<B::Label> hits;
  for (const auto& [key, val] : table) {
    hits.push_back(b.label());
    b.set(k, key);
    b.jeq(m, k, hits.back());
  }
  auto spin = b.label();
  b.bind(spin);
  b.jmp(spin);
  std::size_t i = 0;
  for (const auto& [key, val] : table) {
    b.bind(hits[i++]);
    b.set(v, 2 * val + 1);
    b.halt(v);
  }
  return b.build();
}

AntiCuppingReplay anti_cupping_replay(const Program& p, const PartialFn& g, const PartialFn& f,
                                      const std::set<Nat>& A, const PartialFn& beta, const std::vector<Nat>& D,
                                      const Budget& b) {
  AntiCuppingReplay out;
  auto oracle = PartialFn::join(PartialFn::restrict(f, A), beta);
  out.original = verify_reduction(p, g, oracle, D, b);
  out.f_queries = trace_queries(p, oracle, D, b, QuerySide::Even, &g).all;
  std::set<Nat> aq;
  std::set_intersection(A.begin(), A.end(), out.f_queries.begin(), out.f_queries.end(), std::inserter(aq, aq.end()));
  out.restricted = verify_reduction(p, g, PartialFn::join(PartialFn::restrict(f, aq), beta), D, b);
  std::map<Nat, Nat> table;
  for (const Nat& q : aq)
    if (auto a = f.eval(q); a.kind == OracleAnswer::Kind::Defined) table.emplace(q, a.value);
  out.derived = compose(p, table_join_program(table));
  // the composite runs p and the table program inside SIM; give it room
  Budget wide(b.step_fuel * 16, b.round_cap, b.oracle_fuel);
  out.beta_only = verify_reduction(out.derived, g, beta, D, wide);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {
Json nat_list(const std::vector<Nat>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(nat_json(x));
  return a;
}
}  // namespace

Json verify_json(const VerifyReport& r) {
  Json j;
  j["verdict"] = std::string(to_string(r.verdict));
  j["index"] = nat_json(r.index);
  j["domain"] = nat_list(r.domain);
  j["budget"] = budget_json(r.budget);
  if (r.counterexample) j["counterexample"] = nat_json(*r.counterexample);
  if (!r.detail.empty()) j["detail"] = r.detail;
  Json outs = Json::array();
  for (const auto& [n, o] : r.outcomes) outs.push_back(Json::array({nat_json(n), outcome_json(o)}));
  j["outcomes"] = std::move(outs);
  return j;
}

Json certificate_json(const NonReductionCertificate& c) {
  Json j;
  j["index_bound"] = nat_json(c.index_bound);
  j["domain"] = nat_list(c.domain);
  j["budget"] = budget_json(c.budget);
  j["unknown_count"] = c.unknown_count;
  j["exact"] = c.exact();
  Json fs = Json::array();
  for (const auto& f : c.failures) {
    Json x;
    x["index"] = nat_json(f.index);
    x["input"] = nat_json(f.input);
    x["unknown"] = f.unknown;
    x["outcome"] = outcome_json(f.outcome);
    fs.push_back(std::move(x));
  }
  j["failures"] = std::move(fs);
  return j;
}

Json search_json(const SearchResult& r) {
  Json j;
  j["found"] = r.found();
  if (r.witness) j["witness"] = verify_json(*r.witness);
  j["certificate"] = certificate_json(r.certificate);
  return j;
}

}  // namespace subt
