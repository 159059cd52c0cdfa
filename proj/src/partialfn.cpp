#include "subt/partialfn.hpp"

#include <stdexcept>

namespace subt {

struct PartialFn::Node {
  PFKind kind = PFKind::Table;
  std::map<Nat, Nat> table;  // Table entries; TotalByProgram pre-run values
  Nat index = 0;             // TotalByProgram, predicate, Computed
  std::uint64_t fuel = 0;
  std::uint64_t range = 0;
  std::uint64_t certified = 0;
  std::optional<std::set<Nat>> domain;
  std::vector<PartialFn> kids;
  std::optional<Budget> budget;
  JumpVariant variant = JumpVariant::K;
  std::string name;
};

namespace {

const std::map<Nat, Nat> kNoEntries;

OracleAnswer from_outcome(const DialogueOutcome& o) {
  if (o.halted()) return OracleAnswer::defined(o.value);
  if (o.frozen() || o.divergence_certified) return OracleAnswer::undefined();
  return OracleAnswer::unknown();
}

}  // namespace

PartialFn::PartialFn() : node_(std::make_shared<Node>()) {}

PartialFn PartialFn::table(std::map<Nat, Nat> entries) {
  auto n = std::make_shared<Node>();
  n->table = std::move(entries);
  return PartialFn(n);
}

PartialFn PartialFn::total_by_program(const Nat& index, std::uint64_t per_input_fuel, std::uint64_t range) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::TotalByProgram;
  n->index = index;
  n->fuel = per_input_fuel;
  n->range = range;
  PartialFn empty;
  Budget b(per_input_fuel, 1, 1);
  auto prog = compile_index(index);
  for (std::uint64_t x = 0; x < range; ++x) {
    auto o = run_dialogue(*prog, empty, x, b);
    if (!o.halted()) break;
    n->table.emplace(x, o.value);
    n->certified = x + 1;
  }
  return PartialFn(n);
}

PartialFn PartialFn::restrict(const PartialFn& f, std::set<Nat> domain) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Restriction;
  n->kids = {f};
  n->domain = std::move(domain);
  return PartialFn(n);
}

PartialFn PartialFn::restrict_pred(const PartialFn& f, const Nat& predicate, std::uint64_t fuel) {
  if (fuel == 0) throw std::invalid_argument("predicate fuel must be positive");
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Restriction;
  n->kids = {f};
  n->index = predicate;
  n->fuel = fuel;
  return PartialFn(n);
}

PartialFn PartialFn::join(const PartialFn& f, const PartialFn& g) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Join;
  n->kids = {f, g};
  return PartialFn(n);
}

PartialFn PartialFn::meet(const PartialFn& f, const PartialFn& g, const Budget& b) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Meet;
  n->kids = {f, g};
  n->budget = b;
  return PartialFn(n);
}

PartialFn PartialFn::graph(const PartialFn& f) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Graph;
  n->kids = {f};
  return PartialFn(n);
}

PartialFn PartialFn::jump(const PartialFn& f, const Budget& b, JumpVariant v) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Jump;
  n->kids = {f};
  n->budget = b;
  n->variant = v;
  return PartialFn(n);
}

PartialFn PartialFn::computed(const Nat& index, const PartialFn& base, const Budget& b) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Computed;
  n->kids = {base};
  n->index = index;
  n->budget = b;
  return PartialFn(n);
}

PartialFn PartialFn::ref(std::string name, const PartialFn& target) {
  auto n = std::make_shared<Node>();
  n->kind = PFKind::Ref;
  n->kids = {target};
  n->name = std::move(name);
  return PartialFn(n);
}

PFKind PartialFn::kind() const { return node_->kind; }

const std::map<Nat, Nat>& PartialFn::entries() const {
  return node_->kind == PFKind::Table ? node_->table : kNoEntries;
}

std::uint64_t PartialFn::certified_range() const { return node_->certified; }

OracleAnswer PartialFn::eval(const Nat& x, std::uint64_t fuel) const {
  const Node& n = *node_;
  switch (n.kind) {
    case PFKind::Table: {
      auto it = n.table.find(x);
      return it == n.table.end() ? OracleAnswer::undefined() : OracleAnswer::defined(it->second);
    }
    case PFKind::TotalByProgram: {
      auto it = n.table.find(x);
      return it == n.table.end() ? OracleAnswer::unknown() : OracleAnswer::defined(it->second);
    }
    case PFKind::Restriction: {
      if (n.domain) {
        if (!n.domain->count(x)) return OracleAnswer::undefined();
      } else {
        auto o = run_dialogue(*compile_index(n.index), PartialFn(), x, Budget(n.fuel, 1, 1));
        if (!o.halted()) return OracleAnswer::unknown();
        if (o.value == 0) return OracleAnswer::undefined();
      }
      return n.kids[0].eval(x, fuel);
    }
    case PFKind::Join:
      return bit_test(x, 0) ? n.kids[1].eval(x >> 1, fuel) : n.kids[0].eval(x >> 1, fuel);
    case PFKind::Meet: {
      auto [d, rest] = cantor_unpair(x);
      auto [e, m] = cantor_unpair(rest);
      const Budget& b = *n.budget;
      auto left = run_dialogue(*compile_index(d), n.kids[0], m, b);
      if (left.frozen() || left.divergence_certified) return OracleAnswer::undefined();
      if (!left.halted()) return OracleAnswer::unknown();
      // one step pool for both sides
      std::uint64_t left_over = b.step_fuel - left.steps;
      if (left_over == 0) return OracleAnswer::unknown();
      auto right = run_dialogue(*compile_index(e), n.kids[1], m, Budget(left_over, b.round_cap, b.oracle_fuel));
      if (right.frozen() || right.divergence_certified) return OracleAnswer::undefined();
      if (!right.halted()) return OracleAnswer::unknown();
      return left.value == right.value ? OracleAnswer::defined(left.value) : OracleAnswer::undefined();
    }
    case PFKind::Graph: {
      auto [k, v] = cantor_unpair(x);
      auto a = n.kids[0].eval(k, fuel);
      if (a.kind != OracleAnswer::Kind::Defined) return a;
      return OracleAnswer::defined(a.value == v ? 1 : 0);
    }
    case PFKind::Jump: {
      auto a = k_jump(n.kids[0], x, *n.budget);
      switch (a.kind) {
        case JumpAnswer::Kind::One: return OracleAnswer::defined(1);
        case JumpAnswer::Kind::ZeroCertified: return OracleAnswer::defined(0);
        case JumpAnswer::Kind::UndefinedFrozen:
          return n.variant == JumpVariant::K0 ? OracleAnswer::defined(0) : OracleAnswer::undefined();
        case JumpAnswer::Kind::Unknown: return OracleAnswer::unknown();
      }
      return OracleAnswer::unknown();
    }
    case PFKind::Computed:
      return from_outcome(run_dialogue(*compile_index(n.index), n.kids[0], x, *n.budget));
    case PFKind::Ref: return n.kids[0].eval(x, fuel);
  }
  return OracleAnswer::unknown();
}

// ---------------------------------------------------------------------------
// serialization

Json PartialFn::to_json() const {
  const Node& n = *node_;
  Json j;
  switch (n.kind) {
    case PFKind::Table: {
      j["kind"] = "table";
      Json es = Json::array();
      for (const auto& [k, v] : n.table) es.push_back(Json::array({nat_json(k), nat_json(v)}));
      j["entries"] = std::move(es);
      break;
    }
    case PFKind::TotalByProgram:
      j["kind"] = "total_by_program";
      j["index"] = nat_json(n.index);
      j["fuel"] = n.fuel;
      j["range"] = n.range;
      j["certified"] = n.certified;
      break;
    case PFKind::Restriction:
      j["kind"] = "restrict";
      j["base"] = n.kids[0].to_json();
      if (n.domain) {
        Json s = Json::array();
        for (const auto& x : *n.domain) s.push_back(nat_json(x));
        j["set"] = std::move(s);
      } else {
        j["predicate"] = nat_json(n.index);
        j["fuel"] = n.fuel;
      }
      break;
    case PFKind::Join:
      j["kind"] = "join";
      j["left"] = n.kids[0].to_json();
      j["right"] = n.kids[1].to_json();
      break;
    case PFKind::Meet:
      j["kind"] = "meet";
      j["left"] = n.kids[0].to_json();
      j["right"] = n.kids[1].to_json();
      j["budget"] = budget_json(*n.budget);
      break;
    case PFKind::Graph:
      j["kind"] = "graph";
      j["base"] = n.kids[0].to_json();
      break;
    case PFKind::Jump:
      j["kind"] = "jump";
      j["variant"] = n.variant == JumpVariant::K ? "K" : "K0";
      j["base"] = n.kids[0].to_json();
      j["budget"] = budget_json(*n.budget);
      break;
    case PFKind::Computed:
      j["kind"] = "computed";
      j["index"] = nat_json(n.index);
      j["base"] = n.kids[0].to_json();
      j["budget"] = budget_json(*n.budget);
      break;
    case PFKind::Ref:
      j["kind"] = "ref";
      j["name"] = n.name;
      break;
  }
  return j;
}

PartialFn PartialFn::from_json(const Json& j, const std::map<std::string, PartialFn>& refs) {
  auto kind = j.at("kind").get<std::string>();
  auto sub = [&](const char* key) { return from_json(j.at(key), refs); };
  if (kind == "table") {
    std::map<Nat, Nat> es;
    for (const auto& kv : j.at("entries")) {
      Nat k = json_nat(kv.at(0));
      if (!es.emplace(k, json_nat(kv.at(1))).second)
        throw std::invalid_argument("duplicate key " + to_string(k) + " in table");
    }
    return table(std::move(es));
  }
  if (kind == "total_by_program")
    return total_by_program(json_nat(j.at("index")), j.at("fuel").get<std::uint64_t>(),
                            j.at("range").get<std::uint64_t>());
  if (kind == "restrict") {
    if (j.contains("set")) {
      std::set<Nat> s;
      for (const auto& x : j.at("set")) s.insert(json_nat(x));
      return restrict(sub("base"), std::move(s));
    }
    return restrict_pred(sub("base"), json_nat(j.at("predicate")), j.at("fuel").get<std::uint64_t>());
  }
  if (kind == "join") return join(sub("left"), sub("right"));
  if (kind == "meet") return meet(sub("left"), sub("right"), json_budget(j.at("budget")));
  if (kind == "graph") return graph(sub("base"));
  if (kind == "jump") {
    auto v = j.at("variant").get<std::string>();
    if (v != "K" && v != "K0") throw std::invalid_argument("unknown jump variant " + v);
    return jump(sub("base"), json_budget(j.at("budget")), v == "K" ? JumpVariant::K : JumpVariant::K0);
  }
  if (kind == "computed") return computed(json_nat(j.at("index")), sub("base"), json_budget(j.at("budget")));
  if (kind == "ref") {
    auto name = j.at("name").get<std::string>();
    auto it = refs.find(name);
    if (it == refs.end()) throw std::invalid_argument("unresolved function reference '" + name + "'");
    return ref(name, it->second);
  }
  throw std::invalid_argument("unknown partial function kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// jumps

std::string_view to_string(JumpAnswer::Kind k) {
  switch (k) {
    case JumpAnswer::Kind::One: return "one";
    case JumpAnswer::Kind::ZeroCertified: return "zero_certified";
    case JumpAnswer::Kind::UndefinedFrozen: return "undefined_frozen";
    case JumpAnswer::Kind::Unknown: return "unknown";
  }
  return "?";
}

JumpAnswer k_jump(const Oracle& f, const Nat& e, const Budget& b) {
  auto o = apply_pca(e, e, f, b);
  JumpAnswer a;
  if (o.halted()) {
    a.kind = JumpAnswer::Kind::One;
  } else if (o.frozen()) {
    a.kind = JumpAnswer::Kind::UndefinedFrozen;
    a.query = o.value;
  } else if (o.divergence_certified) {
    a.kind = JumpAnswer::Kind::ZeroCertified;
  } else {
    a.kind = JumpAnswer::Kind::Unknown;
    a.reason = o.reason;
  }
  return a;
}

JumpAnswer k0(const Oracle& f, const Nat& e, const Budget& b) {
  JumpAnswer a = k_jump(f, e, b);
  a.k0_zero = a.kind == JumpAnswer::Kind::UndefinedFrozen;
  return a;
}

// ---------------------------------------------------------------------------
// witness programs

using B = ProgramBuilder;

Program echo_program() {
  B b;
  auto first = b.label();
  b.if_first_round(first);
  auto a = b.fresh();
  b.nth(a, kRegAnswers, B::kZero);
  b.output(a);
  b.bind(first);
  b.query(kRegInput);
  return b.build();
}

Program constant_program(const Nat& v) {
  B b;
  auto r = b.fresh();
  b.set(r, 2 * v + 1);
  b.halt(r);
  return b.build();
}

Program self_loop_program() {
  B b;
  auto l = b.label();
  b.bind(l);
  b.jmp(l);
  return b.build();
}

namespace {

// query register q in round 0, output the first answer afterwards
void ask_then_echo(B& b, B::Reg q) {
  auto first = b.label();
  b.if_first_round(first);
  auto a = b.fresh();
  b.nth(a, kRegAnswers, B::kZero);
  b.output(a);
  b.bind(first);
  b.query(q);
}

Program join_side(bool right) {
  B b;
  auto t = b.fresh();
  b.add(t, kRegInput, kRegInput);
  if (right) b.inc(t);
  ask_then_echo(b, t);
  return b.build();
}

Program graph_fwd() {
  B b;
  auto n = b.fresh(), m = b.fresh(), a = b.fresh(), o = b.fresh();
  auto ask = b.label(), yes = b.label();
  b.unpair(n, m, kRegInput);
  b.if_first_round(ask);
  b.nth(a, kRegAnswers, B::kZero);
  b.jeq(a, m, yes);
  b.set(o, 1);  // output 0
  b.halt(o);
  b.bind(yes);
  b.set(o, 3);  // output 1
  b.halt(o);
  b.bind(ask);
  b.query(n);
  return b.build();
}

// Asks probe(<n,s>) in round s until an answer is 1, then outputs s-1.
// probe is emitted by the callback: it reads register c and writes register i.
Program search_ones(const std::function<void(B&, B::Reg, B::Reg)>& probe) {
  B b;
  auto t = b.fresh(), a = b.fresh(), one = b.fresh(), c = b.fresh(), i = b.fresh();
  auto ask = b.label(), done = b.label(), next = b.label();
  b.if_first_round(ask);
  b.copy(t, kRegRound);
  b.decj(t, next);
  b.bind(next);
  b.nth(a, kRegAnswers, t);
  b.set(one, 1);
  b.jeq(a, one, done);
  b.bind(ask);
  b.pair(c, kRegInput, kRegRound);
  probe(b, c, i);
  b.query(i);
  b.bind(done);
  b.output(t);
  return b.build();
}

Program graph_bwd() {
  return search_ones([](B& b, B::Reg c, B::Reg i) { b.copy(i, c); });
}

Program meet_side(bool right) {
  B b;
  auto d = b.fresh(), e = b.fresh(), n = b.fresh(), rest = b.fresh(), out = b.fresh();
  b.unpair(d, rest, kRegInput);
  b.unpair(e, n, rest);
  // our answers are exactly the simulated program's answers
  b.sim(out, right ? e : d, n, kRegAnswers);
  b.halt(out);
  return b.build();
}

// Programs of the shape [SET r4 c] ++ tail, with tail independent of c.
constexpr std::uint64_t kFamilyReg = 4;

struct Family {
  Nat scale;   // 3^{|T|+1}
  Nat offset;  // 3^{|T|+1} + val(T) + 1
};

Family family_of(const Program& member) {
  std::string t;
  for (std::size_t k = 1; k < member.code.size(); ++k) {
    if (k > 1) t.push_back('#');
    t += bijective_binary(encode_instruction(member.code[k]));
  }
  Nat scale = boost::multiprecision::pow(Nat(3), static_cast<unsigned>(t.size() + 1));
  return {scale, scale + from_bijective_ternary(t) + 1};
}

// code of SET r4 c, plus one: 13 * 2^R * (2c+1) - 7
constexpr std::uint64_t kSetMul = 13 * (1u << kFamilyReg) * 2;
constexpr std::uint64_t kSetAdd = 13 * (1u << kFamilyReg) - 7;

Nat family_index(const Family& f, const Nat& c) {
  Nat x = kSetMul * c + kSetAdd;
  Nat acc = 0, pw = 1;
  while (x > 1) {
    acc += (bit_test(x, 0) ? 2 : 1) * pw;
    x >>= 1;
    pw *= 3;
  }
  return f.offset + f.scale * acc;
}

// in-machine version of family_index; reads c, writes i
void emit_family_index(B& b, const Family& f, B::Reg c, B::Reg i) {
  auto x = b.fresh(), k = b.fresh(), acc = b.fresh(), pw = b.fresh(), one = b.fresh(), bit = b.fresh(),
       t = b.fresh();
  auto loop = b.label(), end = b.label(), once = b.label();
  b.mul_const(x, c, kSetMul);
  b.set(k, kSetAdd);
  b.add(x, x, k);
  b.set(acc, 0);
  b.set(pw, 1);
  b.set(one, 1);
  b.bind(loop);
  b.jeq(x, one, end);
  b.halve(x, bit, x);
  b.jeq(bit, B::kZero, once);
  b.add(acc, acc, pw);
  b.bind(once);
  b.add(acc, acc, pw);
  b.add(t, pw, pw);
  b.add(pw, t, pw);
  b.jmp(loop);
  b.bind(end);
  b.mul_const(i, acc, f.scale);
  b.set(k, f.offset);
  b.add(i, i, k);
}

Program domain_probe_program(const Nat& n) {
  B b;
  auto r = b.fresh();
  if (r != kFamilyReg) throw std::logic_error("family register mismatch");
  b.set(r, n);
  auto ask = b.label();
  b.if_first_round(ask);
  auto o = b.fresh();
  b.set(o, 1);  // output 0
  b.halt(o);
  b.bind(ask);
  b.query(r);
  return b.build();
}

const Family& graph_probe_family() {
  static const Family f = family_of(graph_probe_program(0));
  return f;
}

const Family& domain_probe_family() {
  static const Family f = family_of(domain_probe_program(0));
  return f;
}

}  // namespace

std::vector<NamedProgram> canonical_witnesses() {
  return {
      {"W_graph_fwd", graph_fwd()},      {"W_graph_bwd", graph_bwd()},        {"W_join_left", join_side(false)},
      {"W_join_right", join_side(true)}, {"W_meet_left", meet_side(false)},   {"W_meet_right", meet_side(true)},
      {"echo", echo_program()},
  };
}

const Program& witness(std::string_view name) {
  static const std::vector<NamedProgram> table = canonical_witnesses();
  for (const auto& w : table)
    if (w.name == name) return w.program;
  throw std::invalid_argument("no witness named " + std::string(name));
}

Program meet_universality(const Nat& d, const Nat& e) {
  B b;
  auto rd = b.fresh(), re = b.fresh(), t = b.fresh();
  b.set(rd, d);
  b.set(re, e);
  b.pair(t, re, kRegInput);
  b.pair(t, rd, t);
  ask_then_echo(b, t);
  return b.build();
}

Program join_witness(const Nat& p, const Nat& q) {
  B b;
  auto rp = b.fresh(), rq = b.fresh(), m = b.fresh(), bit = b.fresh(), out = b.fresh();
  auto even = b.label();
  b.set(rp, p);
  b.set(rq, q);
  b.halve(m, bit, kRegInput);
  b.jeq(bit, B::kZero, even);
  b.sim(out, rq, m, kRegAnswers);
  b.halt(out);
  b.bind(even);
  b.sim(out, rp, m, kRegAnswers);
  b.halt(out);
  return b.build();
}

Program table_program(const std::map<Nat, Nat>& f) {
  B b;
  auto k = b.fresh(), v = b.fresh();
  std::vector<B::Label> hits;
  for (const auto& [key, val] : f) {
    hits.push_back(b.label());
    b.set(k, key);
    b.jeq(kRegInput, k, hits.back());
  }
  auto loop = b.label();
  b.bind(loop);
  b.jmp(loop);
  std::size_t i = 0;
  for (const auto& [key, val] : f) {
    b.bind(hits[i++]);
    b.set(v, 2 * val + 1);
    b.halt(v);
  }
  return b.build();
}

Nat inflation_index(const Nat& n) {
  B b;
  auto r = b.fresh();
  b.set(r, n);
  ask_then_echo(b, r);
  return encode(b.build());
}

Nat monotone_transfer(const Nat& d, const Nat& e) { return encode(compose_at(decode(e), decode(d), e)); }

Nat domain_probe_index(const Nat& n) { return encode(domain_probe_program(n)); }

Program graph_probe_program(const Nat& c) {
  B b;
  auto r = b.fresh();
  if (r != kFamilyReg) throw std::logic_error("family register mismatch");
  auto n = b.fresh(), m = b.fresh(), a = b.fresh(), o = b.fresh();
  auto ask = b.label(), yes = b.label(), loop = b.label();
  b.set(r, c);
  b.unpair(n, m, r);
  b.if_first_round(ask);
  b.nth(a, kRegAnswers, B::kZero);
  b.jeq(a, m, yes);
  b.bind(loop);
  b.jmp(loop);
  b.bind(yes);
  b.set(o, 1);
  b.halt(o);
  b.bind(ask);
  b.query(n);
  return b.build();
}

Nat graph_probe_index_formula(const Nat& c) { return family_index(graph_probe_family(), c); }

Program jump_inflation_witness() {
  return search_ones([](B& b, B::Reg c, B::Reg i) { emit_family_index(b, graph_probe_family(), c, i); });
}

Program domain_via_k0_witness() {
  B b;
  auto i = b.fresh();
  auto first = b.label();
  b.if_first_round(first);
  auto a = b.fresh();
  b.nth(a, kRegAnswers, B::kZero);
  b.output(a);
  b.bind(first);
  emit_family_index(b, domain_probe_family(), kRegInput, i);
  b.query(i);
  return b.build();
}

}  // namespace subt
