#include <doctest.h>

#include <random>

#include "subt/partialfn.hpp"

using namespace subt;

namespace {

Budget big() { return Budget(2'000'000, 1000, 1'000'000); }

PartialFn tab(std::map<Nat, Nat> m) { return PartialFn::table(std::move(m)); }

bool is_def(const OracleAnswer& a, unsigned v) { return a.kind == OracleAnswer::Kind::Defined && a.value == v; }
bool is_undef(const OracleAnswer& a) { return a.kind == OracleAnswer::Kind::Undefined; }

PartialFn random_table(std::mt19937_64& rng, unsigned span, unsigned maxv) {
  std::map<Nat, Nat> m;
  for (unsigned i = 0; i < span; ++i)
    if (rng() % 3) m[i] = rng() % maxv;
  return tab(m);
}

Nat idx(const Program& p) { return encode(p); }

}  // namespace

TEST_CASE("table and restriction") {
  auto f = tab({{1, 2}, {3, 4}});
  auto r = PartialFn::restrict(f, {3});
  CHECK(is_undef(r.eval(1)));
  CHECK(is_def(r.eval(3), 4));
  auto none = PartialFn::restrict(f, {});
  for (unsigned n = 0; n < 6; ++n) CHECK(is_undef(none.eval(n)));
  auto same = PartialFn::restrict(f, {1, 3});
  for (unsigned n = 0; n < 6; ++n) CHECK(same.eval(n) == f.eval(n));
}

TEST_CASE("restriction by predicate program") {
  // keep even inputs
  ProgramBuilder b;
  auto h = b.fresh(), bit = b.fresh(), o = b.fresh();
  auto odd = b.label();
  b.halve(h, bit, kRegInput);
  b.jeq(bit, ProgramBuilder::kZero, odd);
  b.set(o, 1);
  b.halt(o);
  b.bind(odd);
  b.set(o, 3);
  b.halt(o);
  auto f = tab({{0, 5}, {1, 6}, {2, 7}});
  auto r = PartialFn::restrict_pred(f, idx(b.build()), 100);
  CHECK(is_def(r.eval(0), 5));
  CHECK(is_undef(r.eval(1)));
  CHECK(is_def(r.eval(2), 7));
  auto starved = PartialFn::restrict_pred(f, idx(b.build()), 1);
  CHECK(starved.eval(0).kind == OracleAnswer::Kind::Unknown);
}

TEST_CASE("total by program has a certified range") {
  // x -> x (output 2x+1)
  ProgramBuilder b;
  b.output(kRegInput);
  auto f = PartialFn::total_by_program(idx(b.build()), 100, 20);
  CHECK(f.certified_range() == 20);
  CHECK(is_def(f.eval(7), 7));
  CHECK(f.eval(20).kind == OracleAnswer::Kind::Unknown);
  // a loop never certifies
  auto g = PartialFn::total_by_program(idx(self_loop_program()), 100, 20);
  CHECK(g.certified_range() == 0);
  CHECK(g.eval(0).kind == OracleAnswer::Kind::Unknown);
}

TEST_CASE("join") {
  auto j = PartialFn::join(tab({{0, 4}}), tab({{1, 7}}));
  CHECK(is_def(j.eval(0), 4));
  CHECK(is_def(j.eval(3), 7));
  CHECK(is_undef(j.eval(1)));
}

TEST_CASE("meet") {
  Nat e = idx(echo_program());
  auto f = tab({{0, 1}, {2, 5}});
  auto m = PartialFn::meet(f, f, big());
  CHECK(is_def(m.eval(cantor_triple(e, e, 0)), 1));
  CHECK(is_def(m.eval(cantor_triple(e, e, 2)), 5));
  CHECK(is_undef(m.eval(cantor_triple(e, e, 1))));
  auto m2 = PartialFn::meet(tab({{0, 1}}), tab({{0, 2}}), big());
  CHECK(is_undef(m2.eval(cantor_triple(e, e, 0))));
  // self loops are certified, so undefined
  Nat loop = idx(self_loop_program());
  CHECK(is_undef(m.eval(cantor_triple(loop, e, 0))));
  auto tight = PartialFn::meet(f, f, Budget(3, 10, 10));
  CHECK(tight.eval(cantor_triple(e, e, 0)).kind == OracleAnswer::Kind::Unknown);
}

TEST_CASE("graph encoding") {
  auto g = PartialFn::graph(tab({{3, 5}}));
  CHECK(is_def(g.eval(cantor_pair(3, 5)), 1));
  CHECK(is_def(g.eval(cantor_pair(3, 4)), 0));
  CHECK(is_undef(g.eval(cantor_pair(2, 0))));
  auto ge = PartialFn::graph(PartialFn());
  for (unsigned z = 0; z < 30; ++z) CHECK(is_undef(ge.eval(z)));
}

TEST_CASE("canonical witnesses on concrete instances") {
  auto j = PartialFn::join(tab({{0, 4}}), tab({{1, 7}}));
  auto o = run_dialogue(witness("W_join_left"), j, 0, big());
  CHECK(o.halted());
  CHECK(o.value == 4);
  o = run_dialogue(witness("W_join_right"), j, 1, big());
  CHECK(o.value == 7);

  auto g = PartialFn::graph(tab({{3, 5}}));
  o = run_dialogue(witness("W_graph_bwd"), g, 3, big());
  CHECK(o.halted());
  CHECK(o.value == 5);
  CHECK(o.trace.size() == 6);
  for (unsigned s = 0; s < 6; ++s) CHECK(o.trace[s].first == cantor_pair(3, s));

  auto f = tab({{3, 5}});
  o = run_dialogue(witness("W_graph_fwd"), f, cantor_pair(3, 5), big());
  CHECK(o.value == 1);
  o = run_dialogue(witness("W_graph_fwd"), f, cantor_pair(3, 2), big());
  CHECK(o.value == 0);
  o = run_dialogue(witness("W_graph_fwd"), f, cantor_pair(1, 2), big());
  CHECK(o.frozen());
}

TEST_CASE("join and graph witnesses on random tables") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_table(rng, 12, 6), g = random_table(rng, 12, 6);
    auto j = PartialFn::join(f, g);
    auto gf = PartialFn::graph(f);
    for (unsigned n = 0; n < 12; ++n) {
      if (auto a = f.eval(n); a.kind == OracleAnswer::Kind::Defined) {
        CHECK(run_dialogue(witness("W_join_left"), j, n, big()).value == a.value);
        CHECK(run_dialogue(witness("W_graph_bwd"), gf, n, big()).value == a.value);
        for (unsigned m = 0; m < 6; ++m) {
          auto o = run_dialogue(witness("W_graph_fwd"), f, cantor_pair(n, m), big());
          CHECK(o.value == (a.value == m ? 1 : 0));
        }
      }
      if (auto a = g.eval(n); a.kind == OracleAnswer::Kind::Defined)
        CHECK(run_dialogue(witness("W_join_right"), j, n, big()).value == a.value);
    }
  }
}

TEST_CASE("meet witnesses are lower bounds") {
  std::mt19937_64 rng(5);
  Nat e = idx(echo_program());
  Nat c2 = idx(constant_program(2));
  Nat jl = idx(witness("W_join_left"));
  for (int trial = 0; trial < 5; ++trial) {
    auto f = random_table(rng, 8, 3), g = random_table(rng, 8, 3);
    auto m = PartialFn::meet(f, g, big());
    for (const Nat& d : {e, c2, jl})
      for (const Nat& ee : {e, c2})
        for (unsigned n = 0; n < 8; ++n) {
          Nat z = cantor_triple(d, ee, n);
          auto a = m.eval(z);
          if (a.kind != OracleAnswer::Kind::Defined) continue;
          CHECK(run_dialogue(witness("W_meet_left"), f, z, big()).value == a.value);
          CHECK(run_dialogue(witness("W_meet_right"), g, z, big()).value == a.value);
        }
  }
}

TEST_CASE("meet universality") {
  Nat e = idx(echo_program());
  auto f = tab({{0, 1}});
  auto m = PartialFn::meet(f, f, big());
  auto o = run_dialogue(meet_universality(e, e), m, 0, big());
  CHECK(o.halted());
  CHECK(o.value == 1);
  CHECK(o.trace.at(0).first == cantor_triple(e, e, 0));
  // h not below g via e: the reduction fails at <d,e,n>
  auto g = tab({{0, 2}});
  auto mg = PartialFn::meet(f, g, big());
  o = run_dialogue(meet_universality(e, e), mg, 0, big());
  CHECK(o.frozen());
  CHECK(o.value == cantor_triple(e, e, 0));
}

TEST_CASE("join witness reduces a join to a common upper bound") {
  auto h = tab({{0, 3}, {1, 8}, {2, 9}});
  // f = h on evens is reduced by echo, g(n) = h(n+1) by a shifted echo
  ProgramBuilder b;
  auto t = b.fresh();
  b.copy(t, kRegInput);
  b.inc(t);
  auto first = b.label();
  b.if_first_round(first);
  auto a = b.fresh();
  b.nth(a, kRegAnswers, ProgramBuilder::kZero);
  b.output(a);
  b.bind(first);
  b.query(t);
  Program w = join_witness(idx(echo_program()), idx(b.build()));
  CHECK(run_dialogue(w, h, 0, big()).value == 3);  // f(0) = h(0)
  CHECK(run_dialogue(w, h, 2, big()).value == 8);  // f(1)
  CHECK(run_dialogue(w, h, 1, big()).value == 8);  // g(0) = h(1)
  CHECK(run_dialogue(w, h, 3, big()).value == 9);  // g(1)
}

TEST_CASE("table programs compute their table over the empty oracle") {
  std::mt19937_64 rng(3);
  PartialFn empty;
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_table(rng, 10, 50);
    Program p = table_program(f.entries());
    for (unsigned n = 0; n < 12; ++n) {
      auto o = run_dialogue(p, empty, n, big());
      auto a = f.eval(n);
      if (a.kind == OracleAnswer::Kind::Defined) {
        CHECK(o.halted());
        CHECK(o.value == a.value);
      } else {
        CHECK(o.divergence_certified);
      }
    }
  }
}

TEST_CASE("jump answers") {
  auto f = tab({{1, 1}});
  CHECK(k_jump(f, idx(constant_program(0)), big()).kind == JumpAnswer::Kind::One);
  CHECK(k_jump(PartialFn(), idx(constant_program(0)), big()).kind == JumpAnswer::Kind::One);
  ProgramBuilder b;
  auto r = b.fresh();
  b.set(r, 9);
  auto first = b.label();
  b.if_first_round(first);
  b.output(ProgramBuilder::kZero);
  b.bind(first);
  b.query(r);
  Nat q9 = idx(b.build());
  auto a = k_jump(f, q9, big());
  CHECK(a.kind == JumpAnswer::Kind::UndefinedFrozen);
  CHECK(a.query == 9);
  CHECK_FALSE(a.k0_zero);
  CHECK(k0(f, q9, big()).k0_zero);
  CHECK(k_jump(f, idx(self_loop_program()), big()).kind == JumpAnswer::Kind::ZeroCertified);
  CHECK(k_jump(tab({{9, 0}}), q9, big()).kind == JumpAnswer::Kind::One);
  CHECK(k_jump(f, idx(constant_program(0)), Budget(1, 1, 1)).kind == JumpAnswer::Kind::Unknown);
}

TEST_CASE("inflation index") {
  auto f = tab({{2, 9}});
  auto o = apply_pca(inflation_index(2), 0, f, big());
  CHECK(o.halted());
  CHECK(o.value == 9);
  for (unsigned x : {1u, 5u, 100u}) CHECK(apply_pca(inflation_index(2), x, f, big()).value == 9);
  o = apply_pca(inflation_index(3), 0, f, big());
  CHECK(o.frozen());
  CHECK(o.value == 3);
  std::set<Nat> seen;
  for (unsigned n = 0; n <= 100; ++n) seen.insert(inflation_index(n));
  CHECK(seen.size() == 101);
  CHECK(k_jump(f, inflation_index(2), big()).kind == JumpAnswer::Kind::One);
}

TEST_CASE("probe index arithmetic matches the numbering") {
  for (unsigned c = 0; c <= 100; ++c) REQUIRE(graph_probe_index_formula(c) == encode(graph_probe_program(c)));
}

TEST_CASE("f reduces to K(f) through graph probes") {
  Budget kb(200'000, 10, 10'000);
  std::mt19937_64 rng(9);
  Program w = jump_inflation_witness();
  for (int trial = 0; trial < 4; ++trial) {
    auto f = random_table(rng, 6, 5);
    auto kf = PartialFn::jump(f, kb);
    for (unsigned n = 0; n < 6; ++n) {
      auto a = f.eval(n);
      auto o = run_dialogue(w, kf, n, big());
      if (a.kind == OracleAnswer::Kind::Defined) {
        REQUIRE(o.halted());
        CHECK(o.value == a.value);
        // each query is the probe for <n,m>, m = 0..f(n)
        for (std::size_t m = 0; m < o.trace.size(); ++m)
          CHECK(o.trace[m].first == encode(graph_probe_program(cantor_pair(n, m))));
      } else {
        CHECK(o.frozen());
      }
    }
  }
}

TEST_CASE("domain of f reduces to K0(f) but not through K(f)") {
  Budget kb(200'000, 10, 10'000);
  auto f = tab({{0, 3}, {2, 1}, {5, 0}});
  auto k0f = PartialFn::jump(f, kb, JumpVariant::K0);
  auto kf = PartialFn::jump(f, kb, JumpVariant::K);
  Program w = domain_via_k0_witness();
  for (unsigned n = 0; n < 8; ++n) {
    bool in = f.eval(n).kind == OracleAnswer::Kind::Defined;
    auto o = run_dialogue(w, k0f, n, big());
    REQUIRE(o.halted());
    CHECK(o.value == (in ? 1 : 0));
    CHECK(o.trace.at(0).first == domain_probe_index(n));
    auto ok = run_dialogue(w, kf, n, big());
    if (in) CHECK(ok.value == 1);
    else CHECK(ok.frozen());
  }
}

TEST_CASE("monotone transfer") {
  Budget kb(500'000, 20, 10'000);
  Nat d = idx(echo_program());
  auto g = tab({{0, 4}, {7, 1}});
  CHECK(k_jump(g, monotone_transfer(d, idx(constant_program(3))), kb).kind == JumpAnswer::Kind::One);
  ProgramBuilder b;
  auto r = b.fresh();
  b.set(r, 5);
  auto first = b.label();
  b.if_first_round(first);
  b.output(ProgramBuilder::kZero);
  b.bind(first);
  b.query(r);
  Nat q5 = idx(b.build());
  CHECK(k_jump(g, monotone_transfer(d, q5), kb).kind == JumpAnswer::Kind::UndefinedFrozen);
  for (const auto& gg : {g, PartialFn(), tab({{5, 5}})})
    CHECK(k_jump(gg, monotone_transfer(d, idx(self_loop_program())), kb).kind ==
          JumpAnswer::Kind::ZeroCertified);
  // K(f)(e) = K(g)(b(d,e)) when f = g and d echoes
  for (const Nat& e : {q5, idx(constant_program(1)), idx(self_loop_program()), inflation_index(0)})
    CHECK(k_jump(g, e, kb).kind == k_jump(g, monotone_transfer(d, e), kb).kind);
}

TEST_CASE("K and K0 agree on total oracles") {
  Budget kb(200'000, 10, 10'000);
  std::map<Nat, Nat> m;
  for (unsigned i = 0; i < 400; ++i) m[i] = i % 4;
  auto f = tab(m);
  for (const Nat& e : {idx(constant_program(1)), idx(self_loop_program()), inflation_index(3), domain_probe_index(2)}) {
    auto a = k_jump(f, e, kb), b = k0(f, e, kb);
    CHECK(a.kind == b.kind);
    CHECK_FALSE(b.k0_zero);
  }
}

TEST_CASE("partial function json round trip") {
  Budget b(1000, 5, 100);
  auto f = tab({{1, 2}, {3, 4}});
  auto g = PartialFn::join(f, PartialFn::graph(PartialFn::restrict(f, {3})));
  auto h = PartialFn::meet(g, PartialFn::jump(f, b, JumpVariant::K0), b);
  auto c = PartialFn::computed(idx(echo_program()), h, b);
  Json j = c.to_json();
  auto back = PartialFn::from_json(j);
  CHECK(back.to_json() == j);
  for (unsigned n = 0; n < 20; ++n) CHECK(back.eval(n) == c.eval(n));
  auto r = PartialFn::ref("f", f);
  CHECK(r.to_json() == Json{{"kind", "ref"}, {"name", "f"}});
  CHECK_THROWS(PartialFn::from_json(r.to_json()));
  auto rr = PartialFn::from_json(r.to_json(), {{"f", f}});
  CHECK(is_def(rr.eval(3), 4));
  CHECK_THROWS(PartialFn::from_json(Json::parse(R"({"kind":"table","entries":[[1,2],[1,3]]})")));
  Json big = nat_json(Nat(1) << 70);
  CHECK(big.is_string());
  CHECK(json_nat(big) == Nat(1) << 70);
}
