#include <algorithm>

#include "construct_util.hpp"

namespace subt {

using namespace detail;

namespace {

// Every partial function on points with values in vals (undefined included),
// in a fixed order: the last point varies fastest, "undefined" first.
std::vector<std::map<Nat, Nat>> all_sigmas(const std::vector<Nat>& points, const std::vector<Nat>& vals) {
  std::vector<std::map<Nat, Nat>> out{{}};
  for (const auto& p : points) {
    std::vector<std::map<Nat, Nat>> next;
    for (const auto& s : out) {
      next.push_back(s);
      for (const auto& v : vals) {
        auto t = s;
        t[p] = v;
        next.push_back(std::move(t));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

Transcript build_jump_inversion(const PartialFn& h, const ConstructionConfig& c) {
  Transcript t = start("jump-inversion", c);
  t.functions.emplace_back("h", h);
  const auto reqs = c.requirements();

  // sigma values: 0 and whatever h takes on the coded range
  std::set<Nat> valset{0};
  for (std::size_t k = 0; k < reqs.size(); ++k) {
    auto a = h.eval(k);
    if (a.kind == OracleAnswer::Kind::Unknown) throw ContractError("h(" + std::to_string(k) + ") is unknown");
    if (a.kind == OracleAnswer::Kind::Defined) valset.insert(a.value);
  }
  const std::vector<Nat> vals(valset.begin(), valset.end());
  double count = 1;
  for (std::size_t k = 1; k < reqs.size(); ++k) count *= static_cast<double>(vals.size() + 1);
  if (count > 4096) throw ContractError("too many finite oracles sigma to enumerate at the last stage");

  t.functions.emplace_back("f", PartialFn());
  const PartialFn F = named(t, "f");
  BoundedHaltingOracle oracle(c.budget);
  std::vector<Nat> a;      // coding locations
  std::map<Nat, Nat> tau;  // f restricted to a_{e-1}+1
  std::vector<Nat> inputs;
  for (std::uint64_t n = 0; n < c.input_bound; ++n) inputs.emplace_back(n);

  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const Nat& e = reqs[i];
    const Nat lo = a.empty() ? Nat(0) : a.back() + 1;
    StageCertificate cert = next_certificate(t, "requirement");
    Json act;
    act["e"] = nat_json(e);
    act["restraint"] = nat_json(lo);

    // K(f)(e) from f|(a_{e-1}+1), which no later stage changes
    const PartialFn trunc = PartialFn::table(tau);
    const auto& o = oracle.ask(e, trunc, e);
    std::string answer;
    Json require;
    if (o.frozen()) {
      answer = "undefined_frozen";
      act["case"] = 1;
      act["query"] = nat_json(o.value);
      act["query_above_restraint"] = o.value >= lo;
      require["query"] = nat_json(o.value);
    } else if (o.halted()) {
      answer = "one";
      act["case"] = 2;
      require["outcome"] = "halted";
    } else if (o.divergence_certified) {
      answer = "zero_certified";
      act["case"] = 3;
      require["settled"] = true;
    } else {
      // a budget-limited "case 3" stays unknown
      answer = "unknown";
      act["case"] = nullptr;
      cert.status = "inconclusive";
    }
    act["jump"] = answer;

    // a_e: past every first big query of every sigma
    std::vector<Nat> pts(a.begin(), a.end());
    Nat ae = lo;
    Nat q_max = lo, r_max = lo;
    std::size_t sigmas = 0, unsettled = 0;
    for (const auto& s : all_sigmas(pts, vals)) {
      ++sigmas;
      PartialFn sig = PartialFn::table(s);
      const auto& qo = oracle.ask(e, sig, e);
      if (qo.frozen() && qo.value >= lo) q_max = std::max(q_max, Nat(qo.value + 1));
      if (!qo.settled()) ++unsettled;
      for (const auto& ro : oracle.ask_many(e, sig, inputs)) {
        if (ro.frozen() && ro.value >= lo) r_max = std::max(r_max, Nat(ro.value + 1));
        if (!ro.settled()) ++unsettled;
      }
    }
    ae = std::max(q_max, r_max);
    act["sigmas"] = sigmas;
    act["q"] = nat_json(q_max);
    act["r"] = nat_json(r_max);
    act["unsettled_runs"] = unsettled;
    act["a"] = nat_json(ae);
    a.push_back(ae);
    auto hv = h.eval(i);
    act["h_value"] = hv.kind == OracleAnswer::Kind::Defined ? nat_json(hv.value) : Json(nullptr);
    if (hv.kind == OracleAnswer::Kind::Defined) tau[ae] = hv.value;

    cert.evidence.push_back(ev::jump(F, e, c.budget, answer == "unknown" ? Json::object() : Json{{"answer", answer}}));
    // the truncation claim, replayed literally
    cert.evidence.push_back(ev::same_run(e, e, c.budget, F, trunc, Json{{"same", true}}));
    if (o.frozen()) cert.evidence.push_back(ev::dialogue(e, F, e, c.budget, require));
    // coding location: f(a_i) = h(i)
    Json coded = Json::array({answer_json(hv)});
    cert.evidence.push_back(ev::values(F, {ae}, require_equals(coded)));
    cert.evidence.push_back(ev::values(named(t, "h"), {Nat(i)}, require_equals(coded)));
    cert.action = std::move(act);
    cert.oracle_answers = oracle.take_log();
    t.certificates.push_back(std::move(cert));
  }

  for (auto& [name, fn] : t.functions)
    if (name == "f") fn = PartialFn::table(tau);
  t.params["a"] = nats(a);
  t.params["sigma_values"] = nats(vals);
  finalize(t);
  return t;
}

}  // namespace subt
