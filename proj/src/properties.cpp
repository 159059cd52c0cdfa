#include "subt/properties.hpp"

#include <functional>
#include <stdexcept>

#include "subt/constructions.hpp"
#include "subt/search.hpp"

namespace subt {

std::string_view to_string(Mutation m) {
  switch (m) {
    case Mutation::None: return "none";
    case Mutation::JoinSwap: return "join-swap";
    case Mutation::MeetSwap: return "meet-swap";
    case Mutation::GraphEcho: return "graph-echo";
  }
  return "none";
}

std::vector<std::string> mutation_names() { return {"none", "join-swap", "meet-swap", "graph-echo"}; }

Mutation parse_mutation(std::string_view s) {
  for (auto m : {Mutation::None, Mutation::JoinSwap, Mutation::MeetSwap, Mutation::GraphEcho})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown mutation '" + std::string(s) + "'");
}

Json SuiteOptions::to_json() const {
  Json j;
  j["seed"] = seed;
  j["instances"] = instances;
  j["grid"] = grid;
  j["budget"] = budget_json(budget);
  j["mutation"] = std::string(to_string(mutation));
  return j;
}

bool PropertyReport::ok() const {
  for (const auto& p : properties)
    if (!p.ok()) return false;
  return true;
}

std::uint64_t PropertyReport::instances() const {
  std::uint64_t n = 0;
  for (const auto& p : properties) n += p.instances;
  return n;
}

const PropertyTally& PropertyReport::get(std::string_view name) const {
  for (const auto& p : properties)
    if (p.name == name) return p;
  throw std::out_of_range("no property '" + std::string(name) + "'");
}

Json PropertyReport::to_json() const {
  Json j;
  j["suite"] = suite;
  j["options"] = options;
  j["ok"] = ok();
  Json ps = Json::array();
  for (const auto& p : properties) {
    Json x;
    x["name"] = p.name;
    x["instances"] = p.instances;
    x["passed"] = p.passed;
    if (!p.first_failure.is_null()) x["first_failure"] = p.first_failure;
    ps.push_back(std::move(x));
  }
  j["properties"] = std::move(ps);
  j["warnings"] = warnings;
  return j;
}

std::mt19937_64 instance_rng(std::uint64_t seed, std::uint64_t i) {
  std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                  static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  return std::mt19937_64(s);
}

std::map<Nat, Nat> random_table(std::mt19937_64& rng, std::uint64_t grid, double density, std::uint64_t value_bound) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::map<Nat, Nat> m;
  for (std::uint64_t n = 0; n < grid; ++n)
    if (coin(rng) < density) m[n] = rng() % value_bound;
  return m;
}

Program random_program(std::mt19937_64& rng, std::size_t max_len) {
  // weights favour halts and answer reads so dialogues get past round 0
  static constexpr std::array<std::pair<Op, int>, 13> kOps{{{Op::Nop, 1},
                                                            {Op::Inc, 2},
                                                            {Op::Decj, 2},
                                                            {Op::Jmp, 1},
                                                            {Op::Halt, 4},
                                                            {Op::Set, 3},
                                                            {Op::Add, 2},
                                                            {Op::Pair, 1},
                                                            {Op::Unpair, 1},
                                                            {Op::Jeq, 2},
                                                            {Op::Halve, 1},
                                                            {Op::Nth, 3},
                                                            {Op::Snoc, 1}}};
  int total = 0;
  for (const auto& [op, w] : kOps) total += w;
  const std::size_t len = 1 + rng() % max_len;
  Program p;
  for (std::size_t i = 0; i < len; ++i) {
    int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(total));
    Op op = Op::Nop;
    for (const auto& [o, w] : kOps) {
      if (pick < w) {
        op = o;
        break;
      }
      pick -= w;
    }
    Instruction ins;
    ins.op = op;
    for (std::size_t k = 0; k < arity(op); ++k) ins.arg[k] = rng() % 7;
    switch (op) {
      case Op::Set: ins.arg[1] = rng() % 34; break;
      case Op::Decj: ins.arg[1] = rng() % (len + 1); break;
      case Op::Jmp: ins.arg[0] = rng() % (len + 1); break;
      case Op::Jeq: ins.arg[2] = rng() % (len + 1); break;
      default: break;
    }
    p.code.push_back(ins);
  }
  return p;
}

namespace {

struct Check {
  std::size_t prop;
  bool ok;
  Json detail;
};

using InstanceFn = std::function<std::vector<Check>(std::uint64_t, std::mt19937_64&)>;

// Runs instances in fixed batches until every property has its target count
// or the attempt cap is reached. Batches are merged in index order.
PropertyReport drive(std::string suite, const SuiteOptions& o, const std::vector<std::string>& names,
                     const std::vector<std::uint64_t>& targets, std::uint64_t max_attempts, const InstanceFn& fn) {
  PropertyReport r;
  r.suite = std::move(suite);
  r.options = o.to_json();
  for (const auto& n : names) r.properties.push_back(PropertyTally{n, 0, 0, nullptr});
  auto done = [&] {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (r.properties[k].instances < targets[k]) return false;
    return true;
  };
  constexpr std::uint64_t kBatch = 128;
  for (std::uint64_t start = 0; start < max_attempts && !done(); start += kBatch) {
    const std::uint64_t end = std::min(max_attempts, start + kBatch);
    std::vector<std::vector<Check>> out(end - start);
    const auto count = static_cast<std::int64_t>(end - start);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) {
      auto idx = start + static_cast<std::uint64_t>(i);
      auto rng = instance_rng(o.seed, idx);
      out[static_cast<std::size_t>(i)] = fn(idx, rng);
    }
    for (auto& checks : out) {
      for (auto& c : checks) {
        auto& t = r.properties[c.prop];
        if (t.instances >= targets[c.prop]) continue;
        ++t.instances;
        if (c.ok) ++t.passed;
        else if (t.first_failure.is_null()) t.first_failure = std::move(c.detail);
      }
    }
  }
  for (std::size_t k = 0; k < names.size(); ++k)
    if (r.properties[k].instances < targets[k])
      r.warnings.push_back(names[k] + ": only " + std::to_string(r.properties[k].instances) + " applicable instances");
  return r;
}

Json table_json(const std::map<Nat, Nat>& m) { return PartialFn::table(m).to_json(); }

Nat idx(const Program& p) { return encode(p); }

bool witnessed(const Program& p, const PartialFn& f, const PartialFn& g, const std::vector<Nat>& D, const Budget& b) {
  return verify_reduction(p, f, g, D, b).verdict == Verdict::Witnessed;
}

}  // namespace

// ---------------------------------------------------------------------------

PropertyReport dialogue_suite(const SuiteOptions& o) {
  enum { Det, Use, Mono, Freeze, BudgetMono };
  const Budget b(2000, 16, 1000);
  auto fn = [&](std::uint64_t, std::mt19937_64& rng) {
    std::vector<Check> out;
    Program p = random_program(rng, 20);
    auto g = random_table(rng, 16, 0.5, 8);
    Nat n = rng() % 8;
    auto G = PartialFn::table(g);
    auto o1 = run_dialogue(p, G, n, b);
    Json detail{{"program", format_program(p)}, {"oracle", table_json(g)}, {"input", nat_json(n)},
                {"outcome", outcome_json(o1)}};
    out.push_back({Det, run_dialogue(p, G, n, b) == o1, detail});

    if (o1.halted() || o1.frozen()) {
      std::map<Nat, Nat> used;
      for (const auto& [q, a] : o1.trace) used[q] = g.at(q);
      out.push_back({Use, run_dialogue(p, PartialFn::table(used), n, b) == o1, detail});

      Budget more(4 * b.step_fuel, 2 * b.round_cap, b.oracle_fuel);
      Budget exact(std::max<std::uint64_t>(o1.steps, 1), b.round_cap, b.oracle_fuel);
      out.push_back({BudgetMono, run_dialogue(p, G, n, more) == o1 && run_dialogue(p, G, n, exact) == o1, detail});
    }
    if (o1.halted()) {
      auto bigger = g;
      for (std::uint64_t x = 0; x < 32; ++x)
        if (!bigger.count(x) && rng() % 2) bigger[x] = rng() % 8;
      auto o4 = run_dialogue(p, PartialFn::table(bigger), n, b);
      out.push_back({Mono, o4.halted() && o4.value == o1.value && o4.trace == o1.trace, detail});
    }
    bool exact = true;
    for (const auto& [q, a] : o1.trace) exact = exact && g.count(q) && g.at(q) == a;
    if (o1.frozen()) {
      exact = exact && !g.count(o1.value);
      auto filled = g;
      filled[o1.value] = 0;
      auto o5 = run_dialogue(p, PartialFn::table(filled), n, b);
      exact = exact && o5.trace.size() > o1.trace.size() &&
              std::equal(o1.trace.begin(), o1.trace.end(), o5.trace.begin()) &&
              o5.trace[o1.trace.size()] == std::pair<Nat, Nat>(o1.value, 0);
    }
    out.push_back({Freeze, exact, detail});
    return out;
  };
  const auto t = o.instances;
  return drive("dialogue", o, {"determinism", "use_principle", "monotonicity", "freeze_exactness", "budget_monotonicity"},
               {t, t, t, t, t}, 200 * std::max<std::uint64_t>(t, 1), fn);
}

PropertyReport lattice_suite(const SuiteOptions& o) {
  enum { JoinL, JoinR, JoinLub, MeetL, MeetR, MeetU, GraphF, GraphB };
  const Budget& b = o.budget;
  const auto D = range_domain(0, o.grid);
  const Program& wl = witness(o.mutation == Mutation::JoinSwap ? "W_join_right" : "W_join_left");
  const Program& wr = witness("W_join_right");
  const Program& ml = witness(o.mutation == Mutation::MeetSwap ? "W_meet_right" : "W_meet_left");
  const Program& mr = witness("W_meet_right");
  const Program& gf = witness(o.mutation == Mutation::GraphEcho ? "echo" : "W_graph_fwd");
  const Program& gb = witness("W_graph_bwd");
  const Nat echo = idx(echo_program()), three = idx(constant_program(3));
  const Program lub = join_witness(idx(witness("W_join_right")), idx(witness("W_join_left")));
  const Program univ = meet_universality(echo, echo);

  auto fn = [&](std::uint64_t i, std::mt19937_64& rng) {
    std::vector<Check> out;
    auto fm = random_table(rng, o.grid, 0.5, 16);
    // g copies f on part of its domain so meets are not empty
    auto gm = random_table(rng, o.grid, 0.5, 16);
    for (const auto& [k, v] : fm)
      if (rng() % 3 == 0) gm[k] = v;
    auto f = PartialFn::table(fm), g = PartialFn::table(gm);
    Json detail{{"f", table_json(fm)}, {"g", table_json(gm)}};
    auto fg = PartialFn::join(f, g);
    out.push_back({JoinL, witnessed(wl, f, fg, D, b), detail});
    out.push_back({JoinR, witnessed(wr, g, fg, D, b), detail});
    out.push_back({JoinLub, witnessed(lub, fg, PartialFn::join(g, f), range_domain(0, 2 * o.grid), b), detail});

    auto m = PartialFn::meet(f, g, b);
    std::vector<Nat> Dm;
    for (const auto& x : D) {
      Dm.push_back(cantor_triple(echo, echo, x));
      Dm.push_back(cantor_triple(rng() % 2 ? echo : three, rng() % 2 ? echo : three, x));
    }
    out.push_back({MeetL, witnessed(ml, m, f, Dm, b), detail});
    out.push_back({MeetR, witnessed(mr, m, g, Dm, b), detail});
    std::map<Nat, Nat> common;
    for (const auto& [k, v] : fm)
      if (auto it = gm.find(k); it != gm.end() && it->second == v) common[k] = v;
    out.push_back({MeetU, witnessed(univ, PartialFn::table(common), m, D, b), detail});

    if (i % 10 == 0) {
      auto G = PartialFn::graph(f);
      std::vector<Nat> Dg;
      for (const auto& x : D)
        for (std::uint64_t v = 0; v <= 16; ++v) Dg.push_back(cantor_pair(x, Nat(v)));
      out.push_back({GraphF, witnessed(gf, G, f, Dg, b), detail});
      out.push_back({GraphB, witnessed(gb, f, G, D, b), detail});
    }
    return out;
  };
  const auto t = o.instances;
  const auto tg = std::max<std::uint64_t>(t / 10, t ? 1 : 0);
  auto r = drive("lattice", o,
                 {"join_left", "join_right", "join_least_upper_bound", "meet_lower_left", "meet_lower_right",
                  "meet_universality", "graph_forward", "graph_backward"},
                 {t, t, t, t, t, t, tg, tg}, 10 * std::max<std::uint64_t>(t, 1), fn);
  if (o.grid == 0) r.warnings.push_back("grid is empty: every property holds vacuously");
  return r;
}

PropertyReport transitivity_suite(const SuiteOptions& o) {
  const Budget& b = o.budget;
  const std::uint64_t span = std::min<std::uint64_t>(o.grid, 16);
  const auto D = range_domain(0, span);
  auto fn = [&](std::uint64_t, std::mt19937_64& rng) {
    auto fm = random_table(rng, span, 0.6, 8);
    auto f = PartialFn::table(fm);
    Json steps = Json::array();
    // one step up: y with p : x <= y
    auto up = [&](const PartialFn& x, bool first) -> std::pair<PartialFn, Nat> {
      auto r = PartialFn::table(random_table(rng, span, 0.5, 8));
      switch (rng() % (first ? 4 : 3)) {
        case 0: steps.push_back("join_left"); return {PartialFn::join(x, r), idx(witness("W_join_left"))};
        case 1: steps.push_back("join_right"); return {PartialFn::join(r, x), idx(witness("W_join_right"))};
        case 2: steps.push_back("graph"); return {PartialFn::graph(x), idx(witness("W_graph_bwd"))};
        default: {
          steps.push_back("extension");
          auto bigger = fm;
          for (std::uint64_t n = 0; n < 2 * span; ++n)
            if (!bigger.count(n) && rng() % 2) bigger[n] = rng() % 8;
          return {PartialFn::table(bigger), idx(echo_program())};
        }
      }
    };
    auto [g, p] = up(f, true);
    auto [h, q] = up(g, false);
    Json detail{{"f", table_json(fm)}, {"steps", steps}};
    Program r = compose(decode(p), decode(q));
    bool ok = witnessed(r, f, h, D, b);
    return std::vector<Check>{{0, ok, detail}};
  };
  const auto t = std::max<std::uint64_t>(o.instances / 10, o.instances ? 1 : 0);
  return drive("transitivity", o, {"compose_chain"}, {t}, 2 * std::max<std::uint64_t>(t, 1), fn);
}

namespace {

struct TransferRow {
  Nat d, e;
  PartialFn g;
};

std::vector<TransferRow> transfer_corpus() {
  const std::vector<Nat> ds = {idx(echo_program()), idx(constant_program(2)), inflation_index(1)};
  const std::vector<Nat> es = {idx(constant_program(1)), idx(self_loop_program()), idx(ask_then_output_program(5, 0)),
                               idx(echo_program()), inflation_index(0)};
  std::map<Nat, Nat> cyc;
  for (unsigned i = 0; i < 10; ++i) cyc[i] = i % 3;
  const std::vector<PartialFn> gs = {PartialFn::table({{0, 4}, {7, 1}}), PartialFn(),
                                     PartialFn::table({{5, 5}, {1, 2}}), PartialFn::table(cyc)};
  std::vector<TransferRow> out;
  for (const auto& g : gs)
    for (const auto& d : ds)
      for (const auto& e : es)
        if (out.size() < 50) out.push_back({d, e, g});
  return out;
}

JumpAnswer::Kind classify(const DialogueOutcome& o) {
  if (o.halted()) return JumpAnswer::Kind::One;
  if (o.frozen()) return JumpAnswer::Kind::UndefinedFrozen;
  if (o.divergence_certified) return JumpAnswer::Kind::ZeroCertified;
  return JumpAnswer::Kind::Unknown;
}

}  // namespace

PropertyReport jump_suite(const SuiteOptions& o) {
  enum { Inflation, Transfer, KK0, Coverage };
  const Budget kb(200'000, 10, 10'000);
  const Budget run(1'000'000, 64, 1'000'000);
  const auto corpus = transfer_corpus();
  std::map<Nat, Nat> total;
  for (unsigned i = 0; i < 400; ++i) total[i] = i % 4;
  std::vector<Nat> rows = {idx(constant_program(1)), idx(self_loop_program())};
  for (unsigned k = 0; k < 9; ++k) {
    rows.push_back(inflation_index(k));
    rows.push_back(domain_probe_index(k));
  }
  const Program infl = jump_inflation_witness();

  auto fn = [&](std::uint64_t i, std::mt19937_64& rng) {
    std::vector<Check> out;
    auto fm = random_table(rng, 6, 0.6, 5);
    auto f = PartialFn::table(fm);
    out.push_back({Inflation, witnessed(infl, f, PartialFn::jump(f, kb), range_domain(0, 6), run),
                   Json{{"f", table_json(fm)}}});
    if (i < corpus.size()) {
      const auto& row = corpus[i];
      auto nested = run_dialogue(*compile_index(row.e), PartialFn::computed(row.d, row.g, kb), row.e, kb);
      auto via_b = k_jump(row.g, monotone_transfer(row.d, row.e), kb);
      Json detail{{"d", nat_json(row.d)}, {"e", nat_json(row.e)}, {"g", row.g.to_json()},
                  {"nested", std::string(to_string(classify(nested)))}, {"transfer", std::string(to_string(via_b.kind))}};
      out.push_back({Transfer, classify(nested) == via_b.kind && via_b.kind != JumpAnswer::Kind::Unknown, detail});
    }
    if (i < rows.size()) {
      auto T = PartialFn::table(total);
      auto a = k_jump(T, rows[i], kb), z = k0(T, rows[i], kb);
      bool certified = a.kind == JumpAnswer::Kind::One || a.kind == JumpAnswer::Kind::ZeroCertified;
      out.push_back({KK0, !certified || (a.kind == z.kind && !z.k0_zero),
                     Json{{"e", nat_json(rows[i])}, {"K", std::string(to_string(a.kind))},
                          {"K0", std::string(to_string(z.kind))}}});
    }
    return out;
  };
  const auto t = std::max<std::uint64_t>(o.instances / 10, o.instances ? 1 : 0);
  auto r = drive("jump", o, {"inflation", "monotone_transfer", "k_equals_k0_on_total", "transfer_coverage"},
                 {t, corpus.size(), rows.size(), 0},
                 std::max<std::uint64_t>({t, corpus.size(), rows.size()}), fn);
  // the corpus must show all three settled answers
  std::set<JumpAnswer::Kind> seen;
  for (const auto& row : corpus) seen.insert(k_jump(row.g, monotone_transfer(row.d, row.e), kb).kind);
  auto& cov = r.properties[Coverage];
  cov.instances = 1;
  cov.passed = seen.count(JumpAnswer::Kind::One) && seen.count(JumpAnswer::Kind::ZeroCertified) &&
               seen.count(JumpAnswer::Kind::UndefinedFrozen);
  if (!cov.passed) cov.first_failure = "corpus lacks a settled answer kind";
  return r;
}

PropertyReport query_extraction_suite(const SuiteOptions& o) {
  enum { Restrict, HardCode };
  const Budget& b = o.budget;
  const std::uint64_t span = std::min<std::uint64_t>(o.grid, 16);
  const auto D = range_domain(0, span);
  const auto D2 = range_domain(0, 2 * span);
  const Program wl = witness("W_join_left"), wr = witness("W_join_right");
  const Program lub = join_witness(idx(wr), idx(wl));
  const Program chain = compose(witness("W_graph_bwd"), wl);

  auto fn = [&](std::uint64_t, std::mt19937_64& rng) {
    std::vector<Check> out;
    auto fm = random_table(rng, span, 0.6, 8);
    auto bm = random_table(rng, span, 0.6, 8);
    auto f = PartialFn::table(fm), beta = PartialFn::table(bm);
    std::set<Nat> A;
    for (const auto& [k, v] : fm) A.insert(k);
    std::set<Nat> Ag;  // graph points over the grid
    for (const auto& x : D)
      for (std::uint64_t v = 0; v < 8; ++v) Ag.insert(cantor_pair(x, Nat(v)));
    auto Gf = PartialFn::graph(f);

    struct Case {
      const char* name;
      AntiCuppingReplay rep;
    };
    std::vector<Case> cases;
    cases.push_back({"join_left", anti_cupping_replay(wl, f, f, A, beta, D, b)});
    cases.push_back({"join_right", anti_cupping_replay(wr, beta, f, A, beta, D, b)});
    cases.push_back({"join_lub", anti_cupping_replay(lub, PartialFn::join(beta, f), f, A, beta, D2, b)});
    cases.push_back({"graph_then_join", anti_cupping_replay(chain, f, Gf, Ag, beta, D, b)});
    for (const auto& c : cases) {
      Json detail{{"witness", c.name}, {"f", table_json(fm)}, {"beta", table_json(bm)},
                  {"original", std::string(to_string(c.rep.original.verdict))}};
      bool orig = c.rep.original.verdict == Verdict::Witnessed;
      out.push_back({Restrict, orig && c.rep.restricted.verdict == Verdict::Witnessed, detail});
      out.push_back({HardCode, orig && c.rep.beta_only.verdict == Verdict::Witnessed, detail});
    }
    return out;
  };
  const auto t = std::max<std::uint64_t>(o.instances / 10, o.instances ? 1 : 0);
  return drive("query_extraction", o, {"restrict_to_queries", "hard_code_queries"}, {t, t},
               std::max<std::uint64_t>(t, 1), fn);
}

}  // namespace subt
