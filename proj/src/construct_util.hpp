#pragma once

// Helpers shared by the construction sources.

#include "subt/constructions.hpp"

namespace subt::detail {

/// Ref wrapper around a transcript function, so JSON names it instead of inlining it.
inline PartialFn named(const Transcript& t, const std::string& name) { return PartialFn::ref(name, t.fn(name)); }

inline Json nats(const std::vector<Nat>& xs) {
  Json j = Json::array();
  for (const auto& x : xs) j.push_back(nat_json(x));
  return j;
}

inline Json nats(const std::set<Nat>& xs) { return nats(std::vector<Nat>(xs.begin(), xs.end())); }

/// Phi(n) cannot be f(n): settled and not halting with that value.
inline bool diagonalizes(const DialogueOutcome& o, const Nat& v) { return o.settled() && !(o.halted() && o.value == v); }

inline Json diag_require(const Nat& v) {
  Json r;
  r["not_value"] = nat_json(v);
  r["settled"] = true;
  return r;
}

inline Json require_equals(Json x) { return Json{{"equals", std::move(x)}}; }

inline Json defined_values(const std::vector<Nat>& vs) {
  Json j = Json::array();
  for (const auto& v : vs) j.push_back(Json{{"defined", nat_json(v)}});
  return j;
}

/// Evaluates a hypothesis now, records it with its result, and refuses to
/// continue when it fails.
inline void hypothesis(const Transcript& t, StageCertificate& cert, Json spec, const std::string& refusal) {
  Json r = evaluate_evidence(spec, t.fn_refs(), t.sets);
  bool ok = evidence_holds(spec, r);
  spec["result"] = std::move(r);
  cert.evidence.push_back(std::move(spec));
  if (!ok) throw ContractError(refusal);
}

inline Transcript start(std::string name, const ConstructionConfig& c) {
  Transcript t;
  t.construction = std::move(name);
  t.config = c.to_json();
  return t;
}

inline StageCertificate next_certificate(const Transcript& t, std::string kind) {
  StageCertificate c;
  c.stage = t.certificates.size();
  c.kind = std::move(kind);
  return c;
}

}  // namespace subt::detail
