#include <functional>
#include <random>

#include "construct_util.hpp"

namespace subt {

using namespace detail;
using Reg = ProgramBuilder::Reg;

Program affine_probe_program(const Nat& scale, const Nat& offset) {
  ProgramBuilder b;
  auto first = b.label(), loop = b.label();
  Reg t = b.fresh(), o = b.fresh(), v = b.fresh();
  b.if_first_round(first);
  b.nth(v, kRegAnswers, ProgramBuilder::kZero);
  b.jeq(v, ProgramBuilder::kZero, loop);
  b.output(ProgramBuilder::kZero);
  b.bind(loop);
  b.jmp(loop);
  b.bind(first);
  b.mul_const(t, kRegInput, scale);
  b.set(o, offset);
  b.add(t, t, o);
  b.query(t);
  return b.build();
}

namespace {

// first round queries q, later rounds run `after` with the first answer in v
Program ask_and(const Nat& q, const std::function<void(ProgramBuilder&, Reg)>& after) {
  ProgramBuilder b;
  auto first = b.label();
  Reg r = b.fresh(), v = b.fresh();
  b.if_first_round(first);
  b.nth(v, kRegAnswers, ProgramBuilder::kZero);
  after(b, v);
  b.bind(first);
  b.set(r, q);
  b.query(r);
  return b.build();
}

}  // namespace

Program ask_program(const Nat& q) {
  return ask_and(q, [](ProgramBuilder& b, Reg v) { b.output(v); });
}

Program ask_then_output_program(const Nat& q, const Nat& out) {
  return ask_and(q, [&](ProgramBuilder& b, Reg) {
    Reg r = b.fresh();
    b.set(r, out);
    b.output(r);
  });
}

Program ask_branch_program(const Nat& q, const std::optional<Nat>& on_one) {
  return ask_and(q, [&](ProgramBuilder& b, Reg v) {
    auto zero = b.label(), second = b.label();
    Reg one = b.fresh(), w = b.fresh();
    b.set(one, 1);
    b.jeq(kRegRound, one, second);
    b.nth(w, kRegAnswers, one);
    b.output(w);
    b.bind(second);
    b.jeq(v, ProgramBuilder::kZero, zero);
    if (on_one) {
      b.set(w, *on_one);
      b.query(w);
    } else {
      auto loop = b.label();
      b.bind(loop);
      b.jmp(loop);
    }
    b.bind(zero);
    b.output(ProgramBuilder::kZero);
  });
}

Program ask_forever_program(const Nat& q) {
  ProgramBuilder b;
  Reg r = b.fresh();
  b.set(r, q);
  b.query(r);
  return b.build();
}

Nat meet_query_point(const Nat& a, const Nat& b, const Nat& y) { return 2 * cantor_triple(a, b, y) + 1; }

namespace {

Nat idx(const Program& p) { return encode(p); }

PartialFn identity_table(std::uint64_t size) {
  std::map<Nat, Nat> m;
  for (std::uint64_t n = 0; n < size; ++n) m[n] = n;
  return PartialFn::table(std::move(m));
}

// fixed pseudo-random values; mt19937_64's output sequence is pinned by the standard
std::map<Nat, Nat> random_table(std::uint64_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::map<Nat, Nat> m;
  for (std::uint64_t n = 0; n < size; ++n) m[n] = rng() % 1000;
  return m;
}

std::vector<PartialFn> nested_restrictions(const std::map<Nat, Nat>& f0, std::initializer_list<std::uint64_t> sizes) {
  std::vector<PartialFn> out;
  for (auto k : sizes) {
    std::set<Nat> d;
    for (std::uint64_t i = 0; i < k; ++i) d.insert(i);
    out.push_back(PartialFn::restrict(PartialFn::table(f0), std::move(d)));
  }
  return out;
}

// Each program is generated against the level its stage will see, so the
// strategy is run dry to learn the levels.
std::vector<Nat> nondistributive_requirements(const ConstructionConfig& c) {
  using Gen = std::function<Program(const Nat&)>;
  const Nat c0 = idx(constant_program(0)), loop = idx(self_loop_program()), echo = idx(echo_program());
  const std::vector<Gen> plan = {
      [](const Nat&) { return constant_program(0); },                                        // 1a
      [](const Nat& n) { return ask_program(2 * level_input(n, 1, 0)); },                    // 1b
      [&](const Nat&) { return ask_program(meet_query_point(loop, echo, 0)); },              // 2a
      [&](const Nat& n) { return ask_program(meet_query_point(idx(ask_program(n + 3)), c0, 0)); },  // 2c
      [&](const Nat& n) {
        Nat a = idx(ask_program(n));
        return ask_program(meet_query_point(a, a, 0));  // 3c
      },
      [&](const Nat& n) {
        return ask_program(meet_query_point(idx(ask_branch_program(n, std::nullopt)), c0, 0));  // 3a
      },
      [&](const Nat& n) {
        return ask_program(meet_query_point(idx(ask_branch_program(n, n + 2)), c0, 0));  // 3b
      },
      [&](const Nat& n) {
        return ask_then_output_program(meet_query_point(idx(ask_then_output_program(n, 0)), c0, 0), 5);  // 3d, 1a
      },
      [&](const Nat&) { return ask_forever_program(meet_query_point(c0, c0, 0)); },  // 2b until the cap
  };
  const Budget meet_budget(2 * c.budget.step_fuel, c.budget.round_cap, c.budget.oracle_fuel);
  BoundedHaltingOracle oracle(meet_budget);
  NondistributiveState s;
  std::vector<Nat> out;
  for (const auto& gen : plan) {
    out.push_back(idx(gen(s.n)));
    nondistributive_strategy(out.back(), s, c, oracle);
  }
  return out;
}

}  // namespace

std::vector<std::string> construction_names() {
  return {"quasiminimal", "density", "antichain", "jump-inversion", "sup-spoiler", "inf-spoiler", "nondistributive"};
}

ConstructionConfig bundled_config(std::string_view name) {
  ConstructionConfig c;
  const Nat c0 = idx(constant_program(0)), c1 = idx(constant_program(1)), loop = idx(self_loop_program()),
            echo = idx(echo_program());
  if (name == "quasiminimal") {
    c.E = 4;
    c.indices = {c0, loop, echo, idx(affine_probe_program(1, 0)), idx(affine_probe_program(3, 1))};
  } else if (name == "density") {
    c.E = 4;
    // the probes read f through g + f
    c.indices = {c0, echo, loop, idx(affine_probe_program(2, 1)), idx(affine_probe_program(4, 3))};
  } else if (name == "antichain") {
    c.E = 2;
    c.k = 2;
    c.grid = 256;
    // 4n+1 reads rho(n) through g + (rho + f)
    c.indices = {c0, idx(affine_probe_program(4, 1)), idx(affine_probe_program(4, 5))};
  } else if (name == "jump-inversion") {
    c.E = 4;
    c.indices = {c0, loop, idx(ask_program(1000)), echo, c1};
  } else if (name == "sup-spoiler") {
    c.E = 2;
    c.indices = {echo, idx(ask_program(cantor_pair(Nat(7), Nat(0)))), c0};
  } else if (name == "inf-spoiler") {
    c.E = 2;
    c.indices = {c0, echo, loop};
  } else if (name == "nondistributive") {
    c.E = 8;
    c.indices = nondistributive_requirements(c);
  } else {
    throw std::invalid_argument("unknown construction '" + std::string(name) + "'");
  }
  return c;
}

Transcript run_bundled(std::string_view name, const ConstructionConfig& c) {
  if (name == "quasiminimal") return build_quasiminimal(identity_table(64), c);
  if (name == "density") {
    auto f = random_table(64, 1);
    std::map<Nat, Nat> evens;
    for (const auto& [k, v] : f)
      if (k % 2 == 0) evens[k] = v;
    return build_density(PartialFn::table(f), PartialFn::table(evens), c);
  }
  if (name == "antichain") {
    auto f = random_table(256, 2);
    std::map<Nat, Nat> evens;
    for (const auto& [k, v] : f)
      if (k % 2 == 0) evens[k] = v;
    return build_antichain(PartialFn::table(f), PartialFn::table(evens), c);
  }
  if (name == "jump-inversion") return build_jump_inversion(PartialFn::table({{0, 3}, {1, 1}}), c);
  if (name == "sup-spoiler" || name == "inf-spoiler") {
    auto f0 = random_table(c.grid, 3);
    auto gs = nested_restrictions(f0, {c.grid / 4, c.grid / 2, 3 * c.grid / 4});
    if (name == "sup-spoiler") return spoil_supremum(gs, PartialFn::join(gs[0], PartialFn::join(gs[1], gs[2])), c);
    std::reverse(gs.begin(), gs.end());
    return spoil_infimum(gs, nested_restrictions(f0, {4})[0], c);
  }
  if (name == "nondistributive") return build_nondistributive(c);
  throw std::invalid_argument("unknown construction '" + std::string(name) + "'");
}

Json SuiteReport::to_json() const {
  Json j;
  j["strategy"] = strategy;
  j["stages"] = stages;
  j["satisfied"] = satisfied;
  j["inconclusive"] = inconclusive;
  j["presumed"] = presumed;
  j["violated"] = violated;
  j["replay_failures"] = replay_failures;
  return j;
}

SuiteReport run_requirement_suite(std::string_view name, std::uint64_t E, const ConstructionConfig& c) {
  SuiteReport r;
  r.strategy = std::string(name);
  if (E == 0) return r;
  ConstructionConfig run = c;
  auto reqs = c.requirements();
  for (std::uint64_t e = reqs.size(); e < E; ++e) reqs.emplace_back(e);
  reqs.resize(E);
  run.indices = std::move(reqs);
  run.E = E - 1;
  r.transcript = run_bundled(name, run);
  for (const auto& cert : r.transcript.certificates) {
    if (cert.kind != "requirement") continue;
    ++r.stages;
    if (cert.status == "satisfied") ++r.satisfied;
    else if (cert.status == "inconclusive") ++r.inconclusive;
    else if (cert.status == "presumed") ++r.presumed;
    else ++r.violated;
  }
  r.replay_failures = replay_text(write_transcript(r.transcript)).failures.size();
  return r;
}

}  // namespace subt
