#include "subt/json.hpp"

#include <cstdio>

namespace subt {

Json nat_json(const Nat& n) {
  if (fits_u64(n)) return Json(to_u64(n));
  return Json(to_string(n));
}

Nat json_nat(const Json& j) {
  if (j.is_number_unsigned()) return Nat(j.get<std::uint64_t>());
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return Nat(j.get<std::int64_t>());
  if (j.is_string()) return nat_from_string(j.get<std::string>());
  throw std::invalid_argument("expected a natural number, got " + j.dump());
}

Json budget_json(const Budget& b) {
  return Json{{"steps", b.step_fuel}, {"rounds", b.round_cap}, {"oracle", b.oracle_fuel}};
}

Budget json_budget(const Json& j) {
  return Budget(j.at("steps").get<std::uint64_t>(), j.at("rounds").get<std::uint64_t>(),
                j.at("oracle").get<std::uint64_t>());
}

Json outcome_json(const DialogueOutcome& o) {
  Json j;
  j["outcome"] = std::string(to_string(o.kind));
  switch (o.kind) {
    case OutcomeKind::Halted: j["value"] = nat_json(o.value); break;
    case OutcomeKind::Frozen: j["query"] = nat_json(o.value); break;
    case OutcomeKind::Exhausted:
      j["reason"] = std::string(to_string(o.reason));
      if (o.divergence_certified) j["certified"] = true;
      break;
  }
  Json tr = Json::array();
  for (const auto& [q, a] : o.trace) tr.push_back(Json::array({nat_json(q), nat_json(a)}));
  j["trace"] = std::move(tr);
  j["steps"] = o.steps;
  return j;
}

DialogueOutcome json_outcome(const Json& j) {
  DialogueOutcome o;
  auto kind = j.at("outcome").get<std::string>();
  if (kind == "halted") {
    o.kind = OutcomeKind::Halted;
    o.value = json_nat(j.at("value"));
  } else if (kind == "frozen") {
    o.kind = OutcomeKind::Frozen;
    o.value = json_nat(j.at("query"));
  } else if (kind == "exhausted") {
    o.kind = OutcomeKind::Exhausted;
    auto r = j.at("reason").get<std::string>();
    if (r == "step_budget") o.reason = ExhaustReason::StepBudget;
    else if (r == "round_cap") o.reason = ExhaustReason::RoundCap;
    else if (r == "oracle_budget") o.reason = ExhaustReason::OracleBudget;
    else throw std::invalid_argument("unknown exhaust reason " + r);
    o.divergence_certified = j.value("certified", false);
  } else {
    throw std::invalid_argument("unknown outcome " + kind);
  }
  for (const auto& qa : j.at("trace")) o.trace.emplace_back(json_nat(qa.at(0)), json_nat(qa.at(1)));
  o.steps = j.at("steps").get<std::uint64_t>();
  return o;
}

std::string dump(const Json& j) { return j.dump(); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace subt
