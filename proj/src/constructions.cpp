#include "subt/constructions.hpp"

#include <algorithm>
#include <optional>

#include "construct_util.hpp"
#include "subt/search.hpp"

namespace subt {

using namespace detail;

std::vector<Nat> ConstructionConfig::requirements() const {
  if (!indices.empty()) return indices;
  std::vector<Nat> out;
  for (std::uint64_t e = 0; e <= E; ++e) out.emplace_back(e);
  return out;
}

Json ConstructionConfig::to_json() const {
  Json j;
  j["E"] = E;
  j["indices"] = nats(indices);
  j["budget"] = budget_json(budget);
  j["grid"] = grid;
  j["index_bound"] = index_bound;
  j["k"] = k;
  j["extension"] = extension;
  j["input_bound"] = input_bound;
  j["rounds"] = rounds;
  return j;
}

ConstructionConfig ConstructionConfig::from_json(const Json& j) {
  ConstructionConfig c;
  c.E = j.at("E").get<std::uint64_t>();
  for (const auto& x : j.at("indices")) c.indices.push_back(json_nat(x));
  c.budget = json_budget(j.at("budget"));
  c.grid = j.at("grid").get<std::uint64_t>();
  c.index_bound = j.at("index_bound").get<std::uint64_t>();
  c.k = j.at("k").get<std::uint64_t>();
  c.extension = j.at("extension").get<std::uint64_t>();
  c.input_bound = j.at("input_bound").get<std::uint64_t>();
  c.rounds = j.at("rounds").get<std::uint64_t>();
  return c;
}

namespace {

struct Diagonal {
  std::optional<std::uint64_t> point;
  std::vector<std::uint64_t> blocked;  // candidates the budget could not settle
};

// Least n in [from, grid) in dom(f), outside skip, where Phi_e over oracle
// cannot produce f(n).
Diagonal find_diagonal(BoundedHaltingOracle& oracle, const Nat& e, const PartialFn& over, const PartialFn& f,
                       std::uint64_t from, std::uint64_t grid, const std::set<Nat>& skip) {
  Diagonal d;
  for (std::uint64_t n = from; n < grid; ++n) {
    if (skip.count(n)) continue;
    auto fv = f.eval(n);
    if (fv.kind != OracleAnswer::Kind::Defined) continue;
    const auto& o = oracle.ask(e, over, n);
    if (!o.settled()) {
      d.blocked.push_back(n);
      continue;
    }
    if (diagonalizes(o, fv.value)) {
      d.point = n;
      return d;
    }
  }
  return d;
}

// Least n in [from, grid), outside skip, with Phi_e[over](n) halting.
std::optional<std::uint64_t> find_enumerated(BoundedHaltingOracle& oracle, const Nat& e, const PartialFn& over,
                                             std::uint64_t from, std::uint64_t grid, const std::set<Nat>& skip) {
  for (std::uint64_t n = from; n < grid; ++n) {
    if (skip.count(n)) continue;
    if (oracle.ask(e, over, n).halted()) return n;
  }
  return std::nullopt;
}

Json blocked_json(const std::vector<std::uint64_t>& xs) {
  Json j = Json::array();
  for (auto x : xs) j.push_back(x);
  return j;
}

// The shared stage loop of the immunity constructions: action 1 diagonalizes
// Phi_e[diag_over] against f on dom(f), action 2 keeps a point enumerated by
// Phi_e[enum_over] out of A.
void immune_stages(Transcript& t, const ConstructionConfig& c, const PartialFn& diag_over,
                   const PartialFn& enum_over, std::set<Nat>& A, std::set<Nat>& excluded) {
  const PartialFn f = named(t, "f");
  BoundedHaltingOracle oracle(c.budget);
  std::uint64_t r = 0;
  Json restraints = Json::array();
  for (const Nat& e : c.requirements()) {
    StageCertificate cert = next_certificate(t, "requirement");
    Json act;
    act["e"] = nat_json(e);
    act["r"] = r;
    auto d = find_diagonal(oracle, e, diag_over, f, r, c.grid, excluded);
    std::uint64_t u = r;
    if (d.point) {
      std::uint64_t n = *d.point;
      Nat fn = f.eval(n).value;
      A.insert(n);
      u = n + 1;
      act["diagonal"] = n;
      act["f_value"] = nat_json(fn);
      cert.evidence.push_back(ev::dialogue(e, diag_over, n, c.budget, diag_require(fn)));
      cert.evidence.push_back(ev::values(named(t, "fA"), {n}, require_equals(defined_values({fn}))));
      cert.evidence.push_back(ev::member("A", {n}, require_equals(Json::array({true}))));
    } else {
      act["diagonal"] = nullptr;
      act["blocked"] = blocked_json(d.blocked);
      cert.status = "inconclusive";
    }
    act["u"] = u;
    auto x = find_enumerated(oracle, e, enum_over, u, c.grid, A);
    if (x) {
      excluded.insert(*x);
      r = *x + 1;
      act["excluded"] = *x;
      cert.evidence.push_back(ev::dialogue(e, enum_over, *x, c.budget, Json{{"outcome", "halted"}}));
      cert.evidence.push_back(ev::ce(e, enum_over, c.grid - 1, c.budget, Json{{"contains", Json::array({*x})}}));
      cert.evidence.push_back(ev::member("A", {*x}, require_equals(Json::array({false}))));
    } else {
      act["excluded"] = nullptr;
      act["finite"] = true;
      r = u;
    }
    act["r_next"] = r;
    restraints.push_back(r);
    cert.action = std::move(act);
    cert.oracle_answers = oracle.take_log();
    t.certificates.push_back(std::move(cert));
  }
  t.params["restraints"] = std::move(restraints);
}

}  // namespace

Transcript build_quasiminimal(const PartialFn& f, const ConstructionConfig& c) {
  Transcript t = start("quasiminimal", c);
  t.functions.emplace_back("f", f);
  const auto D = range_domain(0, c.grid);

  StageCertificate pre = next_certificate(t, "precondition");
  pre.action["hypothesis"] = "no index up to the bound computes f on the grid";
  hypothesis(t, pre, ev::search(named(t, "f"), PartialFn(), c.index_bound, D, c.budget, Json{{"found", false}}),
             "f is computable at the bound");
  t.certificates.push_back(std::move(pre));

  std::set<Nat> A, excluded;
  t.sets["A"] = {};
  t.functions.emplace_back("fA", PartialFn());  // placeholder until A is known
  immune_stages(t, c, PartialFn(), named(t, "f"), A, excluded);

  t.sets["A"] = A;
  t.sets["excluded"] = excluded;
  t.functions.back().second = PartialFn::restrict(named(t, "f"), A);
  finalize(t);
  return t;
}

namespace {

// g <= f: a search hit at the bound, else the echo program.
Json reduction_hypothesis(const Transcript& t, const char* lo, const char* hi, const std::vector<Nat>& D,
                          const ConstructionConfig& c, Nat& witness) {
  auto found = search_reduction(t.fn(lo), t.fn(hi), c.index_bound, D, c.budget);
  witness = found.found() ? found.witness->index : encode(echo_program());
  return ev::verify(witness, named(t, lo), named(t, hi), D, c.budget, Json{{"verdict", "witnessed"}});
}

// f <= g: no index below the bound, and echo (far above it) is refuted too.
void refute_reduction(const Transcript& t, StageCertificate& pre, const char* lo, const char* hi,
                      const std::vector<Nat>& D, const ConstructionConfig& c) {
  const std::string what = std::string(lo) + " <= " + hi + " is witnessed at the bound";
  hypothesis(t, pre, ev::search(named(t, lo), named(t, hi), c.index_bound, D, c.budget, Json{{"found", false}}), what);
  hypothesis(t, pre,
             ev::verify(encode(echo_program()), named(t, lo), named(t, hi), D, c.budget, Json{{"verdict", "refuted"}}),
             what);
}

}  // namespace

Transcript build_density(const PartialFn& f, const PartialFn& g, const ConstructionConfig& c) {
  Transcript t = start("density", c);
  t.functions.emplace_back("f", f);
  t.functions.emplace_back("g", g);
  const auto D = range_domain(0, c.grid);

  StageCertificate pre = next_certificate(t, "precondition");
  pre.action["hypothesis"] = "g <= f witnessed and f <= g refuted at the bound";
  Nat w;
  hypothesis(t, pre, reduction_hypothesis(t, "g", "f", D, c, w), "g <= f is not witnessed at the bound");
  refute_reduction(t, pre, "f", "g", D, c);
  pre.action["g_le_f"] = nat_json(w);
  t.certificates.push_back(std::move(pre));

  std::set<Nat> A, excluded;
  t.sets["A"] = {};
  t.functions.emplace_back("fA", PartialFn());
  // dom(g) is c.e. in g, so g stands in for alpha
  immune_stages(t, c, named(t, "g"), PartialFn::join(named(t, "g"), named(t, "f")), A, excluded);
  t.sets["A"] = A;
  t.sets["excluded"] = excluded;
  t.functions.back().second = PartialFn::restrict(named(t, "f"), A);
  t.functions.emplace_back("h", PartialFn::join(named(t, "fA"), named(t, "g")));

  // h sits between g and f on the grid
  StageCertificate post = next_certificate(t, "postcondition");
  const auto Dh = range_domain(0, 2 * c.grid);
  Nat gh = encode(witness("W_join_right"));
  Nat hf = encode(join_witness(encode(echo_program()), w));
  post.action["g_le_h"] = nat_json(gh);
  post.action["h_le_f"] = nat_json(hf);
  Budget wide(c.budget.step_fuel * 8, c.budget.round_cap, c.budget.oracle_fuel);
  post.evidence.push_back(ev::verify(gh, named(t, "g"), named(t, "h"), D, c.budget, Json{{"verdict", "witnessed"}}));
  post.evidence.push_back(ev::verify(hf, named(t, "h"), named(t, "f"), Dh, wide, Json{{"verdict", "witnessed"}}));
  post.evidence.push_back(
      ev::search(named(t, "f"), named(t, "h"), c.index_bound, D, c.budget, Json{{"found", false}}));
  post.evidence.push_back(
      ev::search(named(t, "h"), named(t, "g"), c.index_bound, Dh, c.budget, Json{{"found", false}}));
  t.certificates.push_back(std::move(post));
  finalize(t);
  return t;
}

// ---------------------------------------------------------------------------
// antichain

namespace {

std::vector<std::string> strings_of_length(std::uint64_t L) {
  std::vector<std::string> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << L); ++m) {
    std::string s(L, '0');
    for (std::uint64_t b = 0; b < L; ++b)
      if (m >> (L - 1 - b) & 1) s[b] = '1';
    out.push_back(s);
  }
  return out;
}

std::string set_name(const std::string& s) { return "A[" + s + "]"; }

// Characteristic function of A on [0, len); undecided points count as 0.
PartialFn chi(const std::map<std::uint64_t, bool>& decided, std::uint64_t len) {
  std::map<Nat, Nat> t;
  for (std::uint64_t i = 0; i < len; ++i) {
    auto it = decided.find(i);
    t[i] = it != decided.end() && it->second ? 1 : 0;
  }
  return PartialFn::table(std::move(t));
}

}  // namespace

Transcript build_antichain(const PartialFn& f, const PartialFn& g, const ConstructionConfig& c) {
  Transcript t = start("antichain", c);
  t.functions.emplace_back("f", f);
  t.functions.emplace_back("g", g);
  const auto D = range_domain(0, c.grid);
  if (c.k > 16) throw ContractError("antichain depth k above 16");

  StageCertificate pre = next_certificate(t, "precondition");
  pre.action["hypothesis"] = "g <= f witnessed and f <= g refuted at the bound";
  Nat w;
  hypothesis(t, pre, reduction_hypothesis(t, "g", "f", D, c, w), "g <= f is not witnessed at the bound");
  refute_reduction(t, pre, "f", "g", D, c);
  t.certificates.push_back(std::move(pre));

  // final A_s are written into the header after the stages; evidence names them
  for (const auto& s : strings_of_length(c.k)) {
    t.functions.emplace_back("chi" + set_name(s), PartialFn());
    t.sets[set_name(s)] = {};
  }

  const PartialFn F = named(t, "f"), G = named(t, "g");
  std::map<std::string, std::map<std::uint64_t, bool>> A{{"", {}}};
  std::vector<std::tuple<std::size_t, std::string, std::uint64_t>> exclusions;  // cert, owner, n
  BoundedHaltingOracle oracle(c.budget);
  std::uint64_t r = 0;
  const auto reqs = c.requirements();
  for (std::size_t stage = 0; stage < reqs.size(); ++stage) {
    const Nat& e = reqs[stage];
    const std::uint64_t L = std::min<std::uint64_t>(stage, c.k), L1 = std::min<std::uint64_t>(stage + 1, c.k);

    // action 1: one diagonalization point shared by every A_s, s in 2^L
    StageCertificate cert = next_certificate(t, "requirement");
    Json act;
    act["e"] = nat_json(e);
    act["r"] = r;
    auto d = find_diagonal(oracle, e, G, F, r, c.grid, {});
    std::uint64_t u = r;
    if (d.point) {
      std::uint64_t n = *d.point;
      Nat fn = f.eval(n).value;
      for (auto& [s, a] : A) a[n] = true;
      u = n + 1;
      act["diagonal"] = n;
      act["f_value"] = nat_json(fn);
      cert.evidence.push_back(ev::dialogue(e, G, n, c.budget, diag_require(fn)));
    } else {
      act["diagonal"] = nullptr;
      act["blocked"] = blocked_json(d.blocked);
      cert.status = "inconclusive";
    }
    act["u"] = u;
    cert.action = std::move(act);
    cert.oracle_answers = oracle.take_log();
    std::size_t diag_cert = t.certificates.size();
    t.certificates.push_back(std::move(cert));

    if (L1 > L) {
      std::map<std::string, std::map<std::uint64_t, bool>> split;
      for (const auto& [s, a] : A) {
        split[s + "0"] = a;
        split[s + "1"] = a;
      }
      A = std::move(split);
    }

    // action 2: substages over 2^L1 in order
    for (const auto& s : strings_of_length(L1)) {
      StageCertificate sub = next_certificate(t, "requirement");
      Json sa;
      sa["e"] = nat_json(e);
      sa["substage"] = s;
      sa["u"] = u;
      std::optional<std::pair<std::vector<bool>, std::uint64_t>> hit;
      for (std::uint64_t len = u; len <= u + c.extension && !hit; ++len) {
        const std::uint64_t free = len - u;
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << free) && !hit; ++m) {
          std::vector<bool> rho(len);
          std::map<Nat, Nat> table;
          for (std::uint64_t i = 0; i < len; ++i) {
            bool bit;
            if (i < u) {
              auto it = A[s].find(i);
              bit = it != A[s].end() && it->second;
            } else {
              bit = (m >> (len - 1 - i)) & 1;
            }
            rho[i] = bit;
            table[i] = bit ? 1 : 0;
          }
          PartialFn over = PartialFn::join(G, PartialFn::join(PartialFn::table(table), F));
          if (auto x = find_enumerated(oracle, e, over, u, c.grid, {})) hit.emplace(rho, *x);
        }
      }
      if (hit) {
        auto& [rho, n] = *hit;
        for (std::uint64_t i = 0; i < rho.size(); ++i) A[s][i] = rho[i];
        Json others = Json::array();
        for (auto& [o, a] : A)
          if (o != s) {
            a[n] = false;
            others.push_back(o);
          }
        std::string bits;
        for (bool b : rho) bits.push_back(b ? '1' : '0');
        sa["rho"] = bits;
        sa["enumerated"] = n;
        sa["kept_out_of"] = std::move(others);
        u = std::max<std::uint64_t>(rho.size(), n) + 1;
        exclusions.emplace_back(t.certificates.size(), s, n);
      } else {
        sa["rho"] = nullptr;
      }
      sa["u_next"] = u;
      sub.action = std::move(sa);
      sub.oracle_answers = oracle.take_log();
      t.certificates.push_back(std::move(sub));
    }
    r = u;
    t.certificates[diag_cert].action["r_next"] = r;
  }

  // A_x for x in 2^k: extend the level-reached strings (only when E < k)
  std::map<std::string, std::map<std::uint64_t, bool>> final;
  for (const auto& s : strings_of_length(c.k)) {
    std::string p = s;
    while (!A.count(p)) p.pop_back();
    final[s] = A[p];
  }
  for (const auto& [s, a] : final) {
    std::set<Nat> members;
    for (const auto& [i, in] : a)
      if (in) members.insert(i);
    t.sets[set_name(s)] = members;
    for (auto& [name, fn] : t.functions)
      if (name == "chi" + set_name(s)) fn = chi(a, c.grid);
    t.functions.emplace_back("f" + set_name(s), PartialFn::restrict(F, members));
    t.functions.emplace_back("h" + set_name(s), PartialFn::join(named(t, "f" + set_name(s)), G));
  }

  // evidence against the final sets
  for (std::size_t i = 1; i < t.certificates.size(); ++i) {
    auto& cert = t.certificates[i];
    const Json& act = cert.action;
    if (act.contains("diagonal") && !act.at("diagonal").is_null()) {
      Json n = act.at("diagonal");
      for (const auto& s : strings_of_length(c.k))
        cert.evidence.push_back(ev::member(set_name(s), {json_nat(n)}, require_equals(Json::array({true}))));
    }
  }
  for (const auto& [ci, s, n] : exclusions) {
    auto& cert = t.certificates[ci];
    const Nat e = json_nat(cert.action.at("e"));
    const std::uint64_t len = c.k - s.size();
    // every final A_x below the owner s sees the enumeration
    bool first = true;
    for (const auto& x : strings_of_length(len)) {
      const std::string owner = s + x;
      PartialFn over = PartialFn::join(G, PartialFn::join(named(t, "chi" + set_name(owner)), F));
      cert.evidence.push_back(ev::dialogue(e, over, n, c.budget, Json{{"outcome", "halted"}}));
      if (std::exchange(first, false)) {
        // the same enumeration under a padded index
        Nat padded = pad(e, e + c.k + 1);
        cert.action["padded"] = nat_json(padded);
        cert.evidence.push_back(ev::ce(e, over, c.grid - 1, c.budget, Json{{"contains", Json::array({n})}}));
        cert.evidence.push_back(ev::ce(padded, over, c.grid - 1, c.budget, Json{{"contains", Json::array({n})}}));
      }
    }
    for (const auto& o : strings_of_length(c.k))
      if (o.compare(0, s.size(), s) != 0)
        cert.evidence.push_back(ev::member(set_name(o), {n}, require_equals(Json::array({false}))));
  }
  finalize(t);
  return t;
}

}  // namespace subt
