#include <array>
#include <optional>

#include "construct_util.hpp"

namespace subt {

using namespace detail;

Nat level_input(const Nat& t, unsigned i, unsigned j) { return cantor_triple(t, Nat(i), Nat(j)); }

namespace {

// x |-> f(n, k(n), j) over the oracle f + k
Program level_program(const Nat& n, unsigned j) {
  ProgramBuilder b;
  using Reg = ProgramBuilder::Reg;
  auto first = b.label(), second = b.label();
  Reg tn = b.fresh(), one = b.fresh(), v = b.fresh(), k = b.fresh(), t1 = b.fresh(), t2 = b.fresh(),
      q = b.fresh();
  b.if_first_round(first);
  b.set(one, 1);
  b.jeq(kRegRound, one, second);
  b.nth(v, kRegAnswers, one);
  b.output(v);
  b.bind(second);
  b.nth(k, kRegAnswers, ProgramBuilder::kZero);
  b.set(tn, n);
  b.set(v, j);
  b.pair(t1, k, v);
  b.pair(t2, tn, t1);
  b.add(t2, t2, t2);
  b.query(t2);  // even: the f side
  b.bind(first);
  b.set(tn, n);
  b.add(q, tn, tn);
  b.inc(q);
  b.query(q);  // odd: k(n)
  return b.build();
}

}  // namespace

Program psi_program(const Nat& n) { return level_program(n, 0); }
Program gamma_program(const Nat& n) { return level_program(n, 1); }

namespace {

bool queried(const DialogueOutcome& o, const Nat& x) {
  for (const auto& [q, a] : o.trace)
    if (q == x) return true;
  return false;
}

// A meet side that settles as undefined.
struct Blocker {
  bool left = true;  // g side
  std::string cause;  // hole | above | divergent | differ
  Nat query = 0;
  bool uses_level = false;
};

// Answers Phi_e's queries during the emulated stage. f below the level comes
// from the table; everything else is decided by the case tree, which stops
// the run with Undefined (terminal) or Unknown (blocked).
class StageOracle final : public Oracle {
 public:
  StageOracle(const NondistributiveState& s, BoundedHaltingOracle& o) : s_(s), o_(o) {}

  OracleAnswer eval(const Nat& x, std::uint64_t) const override {
    return bit_test(x, 0) ? meet_query(x >> 1) : f_query(x >> 1);
  }

  mutable Json rounds = Json::array();
  mutable std::string terminal;  // case label once a branch ends the stage
  mutable unsigned gv = 0, hv = 0;
  mutable std::optional<std::pair<std::string, Nat>> declared;  // fn name, point
  mutable Nat next_level;

 private:
  OracleAnswer f_query(const Nat& p) const {
    auto [t, rest] = cantor_unpair(p);
    auto [i, j] = cantor_unpair(rest);
    Json r{{"oracle", "f"}, {"point", nat_json(p)}};
    if (i > 1 || j > 1) {
      r["case"] = terminal = "1a";
      r["outside_levels"] = true;
      rounds.push_back(std::move(r));
      return OracleAnswer::undefined();
    }
    if (t < s_.n) {
      r["case"] = "1a";
      auto it = s_.f.find(p);
      if (it == s_.f.end()) {
        terminal = "1a";
        r["hole"] = true;
        rounds.push_back(std::move(r));
        return OracleAnswer::undefined();
      }
      rounds.push_back(std::move(r));
      return OracleAnswer::defined(it->second);
    }
    r["case"] = terminal = "1b";
    r["level"] = nat_json(t);
    gv = hv = 1 - static_cast<unsigned>(i);
    declared.emplace("f", p);
    next_level = t + 1;
    rounds.push_back(std::move(r));
    return OracleAnswer::undefined();
  }

  OracleAnswer meet_query(const Nat& q) const {
    auto [a, rest] = cantor_unpair(q);
    auto [b, y] = cantor_unpair(rest);
    const Nat& n = s_.n;
    std::array<DialogueOutcome, 2> L, R;
    for (unsigned v = 0; v < 2; ++v) {
      auto g = s_.g, h = s_.h;
      g[n] = v;
      h[n] = v;
      L[v] = o_.ask(a, PartialFn::table(std::move(g)), y);
      R[v] = o_.ask(b, PartialFn::table(std::move(h)), y);
    }
    const std::uint64_t fuel = o_.budget().step_fuel;

    Json r{{"oracle", "meet"}, {"point", nat_json(q)}};
    bool unknown = false;
    std::optional<Nat> common;
    for (unsigned i = 0; i < 2; ++i) {
      for (unsigned j = 0; j < 2; ++j) {
        // the meet's own schedule: left with the full budget, right with what is left
        const auto& l = L[i];
        std::optional<Blocker> blk;
        if (l.frozen() || l.divergence_certified) {
          blk = Blocker{true, l.frozen() ? (l.value > n ? "above" : "hole") : "divergent", l.value, queried(l, n)};
        } else if (!l.halted() || l.steps >= fuel || R[j].steps > fuel - l.steps) {
          unknown = true;
          continue;
        } else {
          const auto& rr = R[j];
          if (rr.frozen() || rr.divergence_certified)
            blk = Blocker{false, rr.frozen() ? (rr.value > n ? "above" : "hole") : "divergent", rr.value,
                          queried(rr, n)};
          else if (!rr.halted())
            unknown = true;
          else if (rr.value != l.value)
            blk = Blocker{false, "differ", 0, queried(l, n) || queried(rr, n)};
          else
            common = l.value;
        }
        if (!blk) continue;
        gv = i;
        hv = j;
        if (blk->cause == "above") {
          terminal = blk->uses_level ? "3b" : "2c";
          declared.emplace(blk->left ? "g" : "h", blk->query);
          next_level = blk->query + 1;
        } else if (blk->cause == "differ") {
          terminal = "3c";
        } else {
          terminal = blk->uses_level ? "3a" : "2a";
        }
        r["case"] = terminal;
        r["side"] = blk->left ? "g" : "h";
        r["cause"] = blk->cause;
        if (blk->cause == "above" || blk->cause == "hole") r["query"] = nat_json(blk->query);
        r["g_n"] = gv;
        r["h_n"] = hv;
        rounds.push_back(std::move(r));
        return OracleAnswer::undefined();
      }
    }
    if (unknown) {
      r["case"] = nullptr;
      r["blocked"] = true;
      rounds.push_back(std::move(r));
      return OracleAnswer::unknown();
    }
    // all four settings agree: nothing to do this round
    bool uses = queried(L[0], n) || queried(L[1], n) || queried(R[0], n) || queried(R[1], n);
    r["case"] = uses ? "3d" : "2b";
    r["value"] = nat_json(*common);
    rounds.push_back(std::move(r));
    return OracleAnswer::defined(*common);
  }

  const NondistributiveState& s_;
  BoundedHaltingOracle& o_;
};

}  // namespace

StageCertificate nondistributive_strategy(const Nat& e, NondistributiveState& s, const ConstructionConfig& c,
                                          BoundedHaltingOracle& oracle) {
  StageCertificate cert;
  cert.kind = "requirement";
  const Nat n = s.n;
  const Nat cn = encode(psi_program(n)), dn = encode(gamma_program(n));
  const Nat input = cantor_triple(cn, dn, Nat(0));
  const Budget outer(c.budget.step_fuel, c.rounds, c.budget.oracle_fuel);

  StageOracle so(s, oracle);
  so.next_level = n + 1;
  const DialogueOutcome out = run_dialogue(*compile_index(e), so, input, outer);

  Json act;
  act["e"] = nat_json(e);
  act["n"] = nat_json(n);
  act["c"] = nat_json(cn);
  act["d"] = nat_json(dn);
  Nat w = 0;
  Json require = Json::object();
  std::string label;
  if (out.halted()) {
    label = "1a";
    w = out.value == 0 ? 1 : 0;
    require["value"] = nat_json(out.value);
    require["not_value"] = nat_json(w);
  } else if (out.frozen()) {
    label = so.terminal;
    require["query"] = nat_json(out.value);
  } else if (out.divergence_certified) {
    label = "1a";
    require["settled"] = true;
    require["not_halted"] = true;
  } else if (out.reason == ExhaustReason::RoundCap) {
    // stands in for infinitely many rounds through (2b)/(3d)
    label = "round_cap";
    cert.status = "presumed";
    require["reason"] = "round_cap";
  } else {
    cert.status = "inconclusive";
    act["blocked_by"] = std::string(to_string(out.reason));
  }
  act["case"] = label.empty() ? Json(nullptr) : Json(label);
  act["rounds"] = so.rounds;
  act["outcome"] = outcome_json(out);

  const unsigned gv = so.gv, hv = so.hv;
  s.g[n] = gv;
  s.h[n] = hv;
  s.f[level_input(n, gv, 0)] = w;
  s.f[level_input(n, hv, 1)] = w;
  s.n = so.next_level;
  act["g_n"] = gv;
  act["h_n"] = hv;
  act["common_value"] = nat_json(w);
  if (so.declared) act["declared_undefined"] = Json{{"fn", so.declared->first}, {"point", nat_json(so.declared->second)}};
  act["next_level"] = nat_json(s.n);

  const PartialFn F = name_ref("f"), G = name_ref("g"), H = name_ref("h");
  Json halts_w{{"outcome", "halted"}, {"value", nat_json(w)}};
  cert.evidence.push_back(ev::dialogue(cn, PartialFn::join(F, G), 0, c.budget, halts_w));
  cert.evidence.push_back(ev::dialogue(dn, PartialFn::join(F, H), 0, c.budget, halts_w));
  cert.evidence.push_back(
      ev::dialogue(e, PartialFn::join(F, PartialFn::meet(G, H, oracle.budget())), input, outer, require));

  // level-n values as written now; later stages only act above them
  std::vector<Nat> pts;
  Json snap = Json::array();
  for (unsigned i = 0; i < 2; ++i)
    for (unsigned j = 0; j < 2; ++j) {
      Nat p = level_input(n, i, j);
      auto it = s.f.find(p);
      snap.push_back(it == s.f.end() ? Json("undefined") : Json{{"defined", nat_json(it->second)}});
      pts.push_back(std::move(p));
    }
  cert.evidence.push_back(ev::values(F, pts, require_equals(snap)));
  cert.evidence.push_back(ev::values(G, {n}, require_equals(defined_values({Nat(gv)}))));
  cert.evidence.push_back(ev::values(H, {n}, require_equals(defined_values({Nat(hv)}))));
  if (so.declared) {
    const auto& [name, p] = *so.declared;
    cert.evidence.push_back(ev::values(name_ref(name), {p}, require_equals(Json::array({"undefined"}))));
  }
  cert.action = std::move(act);
  cert.oracle_answers = oracle.take_log();
  return cert;
}

Transcript build_nondistributive(const ConstructionConfig& c) {
  Transcript t = start("nondistributive", c);
  const Budget meet_budget(2 * c.budget.step_fuel, c.budget.round_cap, c.budget.oracle_fuel);
  BoundedHaltingOracle oracle(meet_budget);
  NondistributiveState s;
  std::vector<Nat> levels;
  for (const auto& e : c.requirements()) {
    levels.push_back(s.n);
    StageCertificate cert = nondistributive_strategy(e, s, c, oracle);
    cert.stage = t.certificates.size();
    t.certificates.push_back(std::move(cert));
  }
  t.functions.emplace_back("f", PartialFn::table(s.f));
  t.functions.emplace_back("g", PartialFn::table(s.g));
  t.functions.emplace_back("h", PartialFn::table(s.h));
  t.params["levels"] = nats(levels);
  t.params["meet_budget"] = budget_json(meet_budget);
  finalize(t);
  return t;
}

}  // namespace subt
