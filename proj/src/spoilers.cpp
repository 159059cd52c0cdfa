#include <algorithm>
#include <optional>

#include "construct_util.hpp"
#include "subt/search.hpp"

namespace subt {

using namespace detail;

namespace {

using B = ProgramBuilder;

// query r in round 0, output the answer afterwards
void ask_then_echo(B& b, B::Reg q) {
  auto first = b.label();
  b.if_first_round(first);
  auto ans = b.fresh();
  b.nth(ans, kRegAnswers, B::kZero);
  b.output(ans);
  b.bind(first);
  b.query(q);
}

// x -> f(<a, x>)
Program column_program(const Nat& a) {
  B b;
  auto r = b.fresh(), q = b.fresh();
  b.set(r, a);
  b.pair(q, r, kRegInput);
  ask_then_echo(b, q);
  return b.build();
}

std::string gname(std::size_t n) { return "g" + std::to_string(n); }

// g_n <= g_{n+1} witnessed and g_{n+1} <= g_n refuted, at the bound
void chain_hypotheses(const Transcript& t, StageCertificate& pre, std::size_t m, const std::vector<Nat>& D,
                      const ConstructionConfig& c, bool increasing) {
  for (std::size_t n = 0; n + 1 < m; ++n) {
    std::string lo = gname(increasing ? n : n + 1), hi = gname(increasing ? n + 1 : n);
    auto found = search_reduction(t.fn(lo), t.fn(hi), c.index_bound, D, c.budget);
    Nat w = found.found() ? found.witness->index : encode(echo_program());
    hypothesis(t, pre, ev::verify(w, named(t, lo), named(t, hi), D, c.budget, Json{{"verdict", "witnessed"}}),
               lo + " <= " + hi + " is not witnessed at the bound");
    hypothesis(t, pre,
               ev::search(named(t, hi), named(t, lo), c.index_bound, D, c.budget, Json{{"found", false}}),
               hi + " <= " + lo + " is witnessed at the bound");
  }
}

}  // namespace

Transcript spoil_supremum(const std::vector<PartialFn>& gs, const PartialFn& h, const ConstructionConfig& c) {
  Transcript t = start("sup-spoiler", c);
  t.functions.emplace_back("h", h);
  for (std::size_t n = 0; n < gs.size(); ++n) t.functions.emplace_back(gname(n), gs[n]);
  if (gs.empty()) {
    t.functions.emplace_back("f", PartialFn());
    t.params["vacuous"] = true;
    finalize(t);
    return t;
  }
  const auto D = range_domain(0, c.grid);

  StageCertificate pre = next_certificate(t, "precondition");
  pre.action["hypothesis"] = "the g_n increase strictly and h is above none of them, at the bound";
  chain_hypotheses(t, pre, gs.size(), D, c, true);
  for (std::size_t n = 0; n < gs.size(); ++n)
    hypothesis(t, pre,
               ev::search(named(t, "h"), named(t, gname(n)), c.index_bound, D, c.budget, Json{{"found", false}}),
               "h <= " + gname(n) + " is witnessed at the bound");
  t.certificates.push_back(std::move(pre));

  // f(<a_n, x>) = g_n(x) for x < grid
  std::map<Nat, Nat> f;
  std::vector<Nat> a{0};
  auto code_column = [&](std::size_t n) {
    if (n >= gs.size()) return;
    for (std::uint64_t x = 0; x < c.grid; ++x) {
      auto v = gs[n].eval(x);
      if (v.kind == OracleAnswer::Kind::Unknown)
        throw ContractError(gname(n) + "(" + std::to_string(x) + ") is unknown");
      if (v.kind == OracleAnswer::Kind::Defined) f[cantor_pair(a[n], Nat(x))] = v.value;
    }
  };
  code_column(0);

  t.functions.emplace_back("f", PartialFn());
  const PartialFn F = named(t, "f");
  std::vector<Nat> hdom;
  for (std::uint64_t n = 0; n < c.input_bound; ++n) {
    auto v = h.eval(n);
    if (v.kind == OracleAnswer::Kind::Defined) hdom.emplace_back(n);
  }

  BoundedHaltingOracle oracle(c.budget);
  const auto reqs = c.requirements();
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const Nat& e = reqs[i];
    const Nat ae = a.back();
    StageCertificate cert = next_certificate(t, "requirement");
    Json act;
    act["e"] = nat_json(e);
    act["a"] = nat_json(ae);
    PartialFn cur = PartialFn::table(f);
    auto outs = oracle.ask_many(e, cur, hdom);
    std::optional<std::size_t> big;
    std::size_t unsettled = 0;
    for (std::size_t j = 0; j < outs.size(); ++j) {
      if (outs[j].frozen() && cantor_unpair(outs[j].value).first > ae) {
        big = j;
        break;
      }
      if (!outs[j].settled()) ++unsettled;
    }
    std::set<Nat> keys;
    for (const auto& [k, v] : f) keys.insert(k);
    if (big) {
      const Nat& q = outs[*big].value;
      auto [b, x] = cantor_unpair(q);
      act["case"] = 1;
      act["input"] = nat_json(hdom[*big]);
      act["undefined"] = Json::array({nat_json(b), nat_json(x)});
      a.push_back(b + 1);
      cert.evidence.push_back(ev::dialogue(e, F, hdom[*big], c.budget, Json{{"query", nat_json(q)}}));
      cert.evidence.push_back(ev::values(F, {q}, require_equals(Json::array({"undefined"}))));
    } else {
      act["case"] = 2;
      act["inputs"] = nats(hdom);
      act["unsettled_runs"] = unsettled;
      a.push_back(ae + 1);
      // locality: every tested computation runs the same on f|(a_e+1) x omega
      PartialFn local = PartialFn::restrict(F, keys);
      for (const auto& n : hdom) cert.evidence.push_back(ev::same_run(e, n, c.budget, F, local, Json{{"same", true}}));
      for (std::size_t j = 0; j < outs.size(); ++j)
        if (diagonalizes(outs[j], h.eval(hdom[j]).value)) {
          act["direct_failure"] = nat_json(hdom[j]);
          cert.evidence.push_back(ev::dialogue(e, F, hdom[j], c.budget, diag_require(h.eval(hdom[j]).value)));
          break;
        }
      if (unsettled > 0) cert.status = "inconclusive";
    }
    act["a_next"] = nat_json(a.back());
    code_column(a.size() - 1);
    cert.action = std::move(act);
    cert.oracle_answers = oracle.take_log();
    t.certificates.push_back(std::move(cert));
  }
  while (a.size() < gs.size()) {
    a.push_back(a.back() + 1);
    code_column(a.size() - 1);
  }

  for (auto& [name, fn] : t.functions)
    if (name == "f") fn = PartialFn::table(f);

  // each g_n reads off its column of f
  StageCertificate post = next_certificate(t, "postcondition");
  Json cols = Json::array();
  for (std::size_t n = 0; n < gs.size(); ++n) {
    Nat p = encode(column_program(a[n]));
    cols.push_back(nat_json(p));
    post.evidence.push_back(ev::verify(p, named(t, gname(n)), F, D, c.budget, Json{{"verdict", "witnessed"}}));
  }
  post.action["column_programs"] = std::move(cols);
  t.certificates.push_back(std::move(post));
  t.params["a"] = nats(a);
  finalize(t);
  return t;
}

// ---------------------------------------------------------------------------

namespace {

Nat lift_index(std::size_t m);

// <lift_{n-1}, echo, x>, built in-machine from x
Program lift_program(std::size_t m) {
  B b;
  auto l = b.fresh(), e = b.fresh(), rest = b.fresh(), q = b.fresh();
  b.set(l, lift_index(m - 1));
  b.set(e, encode(echo_program()));
  b.pair(rest, e, kRegInput);
  b.pair(q, l, rest);
  ask_then_echo(b, q);
  return b.build();
}

// lift_m over g*_m: x -> g*_m(point(m, x))
Nat lift_index(std::size_t m) {
  if (m == 0) return encode(echo_program());
  return encode(lift_program(m));
}

}  // namespace

Nat meet_fold_point(std::size_t n, const Nat& x) {
  if (n == 0) return x;
  return cantor_triple(lift_index(n - 1), encode(echo_program()), x);
}

PartialFn meet_fold(const std::vector<PartialFn>& gs, std::size_t n, const Budget& b) {
  PartialFn acc = gs.at(0);
  for (std::size_t k = 1; k <= n; ++k) acc = PartialFn::meet(acc, gs.at(k), b);
  return acc;
}

Transcript spoil_infimum(const std::vector<PartialFn>& gs, const PartialFn& h, const ConstructionConfig& c) {
  Transcript t = start("inf-spoiler", c);
  t.functions.emplace_back("h", h);
  for (std::size_t n = 0; n < gs.size(); ++n) t.functions.emplace_back(gname(n), gs[n]);
  if (gs.empty()) {
    t.functions.emplace_back("f", PartialFn());
    t.params["vacuous"] = true;
    finalize(t);
    return t;
  }
  const auto D = range_domain(0, c.grid);
  // g*_n as named iterated meets
  for (std::size_t n = 0; n < gs.size(); ++n) {
    PartialFn s = n == 0 ? named(t, gname(0))
                         : PartialFn::meet(named(t, "gstar" + std::to_string(n - 1)), named(t, gname(n)), c.budget);
    t.functions.emplace_back("gstar" + std::to_string(n), s);
  }

  StageCertificate pre = next_certificate(t, "precondition");
  pre.action["hypothesis"] = "the g_n decrease strictly, h is below each, g*_n is not below h, at the bound";
  chain_hypotheses(t, pre, gs.size(), D, c, false);
  for (std::size_t n = 0; n < gs.size(); ++n) {
    auto found = search_reduction(h, gs[n], c.index_bound, D, c.budget);
    Nat w = found.found() ? found.witness->index : encode(echo_program());
    hypothesis(t, pre, ev::verify(w, named(t, "h"), named(t, gname(n)), D, c.budget, Json{{"verdict", "witnessed"}}),
               "h <= " + gname(n) + " is not witnessed at the bound");
    std::vector<Nat> pts;
    for (std::uint64_t x = 0; x < c.grid; ++x) pts.push_back(meet_fold_point(n, x));
    hypothesis(t, pre,
               ev::search(named(t, "gstar" + std::to_string(n)), named(t, "h"), c.index_bound, pts, c.budget,
                          Json{{"found", false}}),
               "g*_" + std::to_string(n) + " <= h is witnessed at the bound");
  }
  t.certificates.push_back(std::move(pre));

  t.functions.emplace_back("f", PartialFn());
  const PartialFn F = named(t, "f"), H = named(t, "h");
  std::map<Nat, Nat> f;
  std::vector<Nat> a;
  BoundedHaltingOracle oracle(c.budget);
  const auto reqs = c.requirements();
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const Nat& e = reqs[i];
    const std::size_t level = std::min(i, gs.size() - 1);
    const PartialFn gstar = t.fn("gstar" + std::to_string(level));
    StageCertificate cert = next_certificate(t, "requirement");
    Json act;
    act["e"] = nat_json(e);
    act["level"] = level;
    std::vector<std::uint64_t> blocked;
    std::optional<std::pair<Nat, Nat>> pick;
    for (std::uint64_t x = 0; x < c.grid && !pick; ++x) {
      Nat p = meet_fold_point(level, x);
      if (!a.empty() && p <= a.back()) continue;
      auto v = gstar.eval(p, c.budget.oracle_fuel);
      if (v.kind == OracleAnswer::Kind::Undefined) continue;
      if (v.kind == OracleAnswer::Kind::Unknown) {
        blocked.push_back(x);
        continue;
      }
      const auto& o = oracle.ask(e, H, p);
      if (!o.settled()) {
        blocked.push_back(x);
        continue;
      }
      if (diagonalizes(o, v.value)) {
        pick.emplace(p, v.value);
        act["x"] = x;
      }
    }
    if (pick) {
      auto& [p, v] = *pick;
      a.push_back(p);
      f[p] = v;
      act["a"] = nat_json(p);
      act["value"] = nat_json(v);
      cert.evidence.push_back(ev::dialogue(e, H, p, c.budget, diag_require(v)));
      cert.evidence.push_back(
          ev::values(named(t, "gstar" + std::to_string(level)), {p}, require_equals(defined_values({v}))));
      cert.evidence.push_back(ev::values(F, {p}, require_equals(defined_values({v}))));
    } else {
      act["a"] = nullptr;
      cert.status = "inconclusive";
    }
    Json bl = Json::array();
    for (auto x : blocked) bl.push_back(x);
    act["blocked"] = std::move(bl);
    cert.action = std::move(act);
    cert.oracle_answers = oracle.take_log();
    t.certificates.push_back(std::move(cert));
  }
  for (auto& [name, fn] : t.functions)
    if (name == "f") fn = PartialFn::table(f);
  t.params["a"] = nats(a);
  finalize(t);
  return t;
}

}  // namespace subt
