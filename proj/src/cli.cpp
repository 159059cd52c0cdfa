#include "subt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "subt/certificate.hpp"
#include "subt/constructions.hpp"
#include "subt/properties.hpp"
#include "subt/search.hpp"

namespace subt::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << bytes;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw UsageError(what + ": expected a natural number, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::out_of_range&) {
    throw UsageError(what + ": '" + s + "' is too large");
  }
}

Nat parse_nat(const std::string& s, const std::string& what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw UsageError(what + ": expected a natural number, got '" + s + "'");
  return Nat(s);
}

std::optional<std::uint64_t> env_u64(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return parse_u64(v, name);
}

// PartialFn JSON, or a bare list of [n, v] pairs
PartialFn read_fn(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
  try {
    if (j.is_array()) {
      std::map<Nat, Nat> m;
      for (const auto& e : j) m[json_nat(e.at(0))] = json_nat(e.at(1));
      return PartialFn::table(std::move(m));
    }
    return PartialFn::from_json(j);
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

Program read_program(const std::string& path) {
  try {
    return parse_program(read_file(path));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// "lo:hi" for [lo, hi), or "a,b,c"
std::vector<Nat> parse_domain(const std::string& s) {
  if (auto c = s.find(':'); c != std::string::npos) {
    auto lo = parse_u64(s.substr(0, c), "--domain"), hi = parse_u64(s.substr(c + 1), "--domain");
    if (hi < lo) throw UsageError("--domain: empty range '" + s + "'");
    return range_domain(lo, hi);
  }
  std::vector<Nat> out;
  std::stringstream in(s);
  for (std::string x; std::getline(in, x, ',');) out.push_back(parse_nat(x, "--domain"));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Json nats_json(const std::vector<Nat>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(nat_json(x));
  return a;
}

// Budget flags resolve as flag, then environment, then the command default.
struct BudgetFlags {
  std::optional<std::uint64_t> steps, rounds, oracle;

  void attach(CLI::App* app) {
    app->add_option("--steps", steps, "step fuel per run (env SUBT_BUDGET_STEPS)");
    app->add_option("--rounds", rounds, "round cap per dialogue");
    app->add_option("--oracle-fuel", oracle, "fuel for each oracle evaluation");
  }

  Budget resolve(const Budget& d) const {
    std::uint64_t s = d.step_fuel;
    if (steps) s = *steps;
    else if (auto e = env_u64("SUBT_BUDGET_STEPS")) s = *e;
    return Budget(s, rounds.value_or(d.round_cap), oracle.value_or(d.oracle_fuel));
  }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::optional<std::uint64_t> jobs;
};

void apply_jobs(const Context& cx) {
  std::optional<std::uint64_t> n = cx.jobs;
  if (!n) n = env_u64("SUBT_JOBS");
  if (n && *n == 0) throw UsageError("--jobs must be positive");
#ifdef _OPENMP
  if (n) omp_set_num_threads(static_cast<int>(std::min<std::uint64_t>(*n, 1024)));
#endif
}

Json envelope(const std::string& command, Json config) {
  Json j;
  j["schema"] = kSchema;
  j["command"] = command;
  j["config"] = std::move(config);
  return j;
}

void emit(const Context& cx, const std::string& output, const Json& j) {
  auto text = j.dump(2) + "\n";
  if (output.empty()) cx.out << text;
  else write_file(output, text);
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string program_file, index, oracle_file, output;
  std::string input = "0";
  BudgetFlags budget;
};

int cmd_run(const Context& cx, const RunArgs& a) {
  if (a.program_file.empty() == a.index.empty()) throw UsageError("give exactly one of --program or --index");
  Program p = a.program_file.empty() ? decode(parse_nat(a.index, "--index")) : read_program(a.program_file);
  PartialFn g = a.oracle_file.empty() ? PartialFn() : read_fn(a.oracle_file);
  Nat n = parse_nat(a.input, "--input");
  Budget b = a.budget.resolve(Budget(100'000, 64, 100'000));
  auto o = run_dialogue(p, g, n, b);
  Json config{{"index", nat_json(encode(p))}, {"oracle", g.to_json()}, {"input", nat_json(n)}, {"budget", budget_json(b)}};
  Json j = envelope("run", std::move(config));
  j["result"] = outcome_json(o);
  emit(cx, a.output, j);
  return kOk;
}

// ---------------------------------------------------------------------------

struct ReduceArgs {
  std::string f_file, g_file, output;
  std::uint64_t index_bound = 1000;
  std::string domain = "0:16";
  bool no_canonical = false;
  BudgetFlags budget;
};

int cmd_reduce(const Context& cx, const ReduceArgs& a) {
  auto f = read_fn(a.f_file), g = read_fn(a.g_file);
  auto D = parse_domain(a.domain);
  Budget b = a.budget.resolve(Budget(2000, 16, 10'000));
  Json config{{"f", f.to_json()},         {"g", g.to_json()},
              {"index_bound", a.index_bound}, {"domain", nats_json(D)},
              {"budget", budget_json(b)},     {"canonical_first", !a.no_canonical}};
  Json j = envelope("reduce", std::move(config));

  // echo lies far above any enumerable bound, so it is tried on its own first
  if (!a.no_canonical) {
    auto v = verify_reduction(echo_program(), f, g, D, b);
    if (v.verdict == Verdict::Witnessed) {
      j["verdict"] = "witnessed";
      j["method"] = "canonical";
      j["witness"] = verify_json(v);
      emit(cx, a.output, j);
      return kOk;
    }
  }
  auto r = search_reduction(f, g, a.index_bound, D, b);
  j["method"] = "search";
  j["search"] = search_json(r);
  int code = kOk;
  if (r.found()) j["verdict"] = "witnessed";
  else if (r.certificate.exact()) {
    j["verdict"] = "refuted";
    code = kRefuted;
  } else {
    j["verdict"] = "inconclusive";
    code = kInconclusive;
  }
  emit(cx, a.output, j);
  return code;
}

// ---------------------------------------------------------------------------

struct LatticeArgs {
  std::uint64_t seed = 1, grid = 64, instances = 1000;
  std::string suite = "lattice", mutation = "none", output;
  BudgetFlags budget;
};

int cmd_lattice(const Context& cx, const LatticeArgs& a) {
  SuiteOptions o;
  o.seed = a.seed;
  o.grid = a.grid;
  o.instances = a.instances;
  o.budget = a.budget.resolve(o.budget);
  try {
    o.mutation = parse_mutation(a.mutation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  using Suite = PropertyReport (*)(const SuiteOptions&);
  const std::vector<std::pair<std::string, Suite>> all = {{"dialogue", dialogue_suite},
                                                          {"lattice", lattice_suite},
                                                          {"transitivity", transitivity_suite},
                                                          {"jump", jump_suite},
                                                          {"query-extraction", query_extraction_suite}};
  std::vector<std::pair<std::string, Suite>> chosen;
  for (const auto& s : all)
    if (a.suite == "all" || a.suite == s.first) chosen.push_back(s);
  if (chosen.empty()) throw UsageError("unknown suite '" + a.suite + "'");

  Json reports = Json::array();
  bool ok = true;
  std::ostream& table = a.output.empty() ? cx.err : cx.out;
  for (const auto& [name, fn] : chosen) {
    auto r = fn(o);
    ok = ok && r.ok();
    table << name << "\n";
    for (const auto& p : r.properties)
      table << "  " << std::left << std::setw(28) << p.name << std::right << std::setw(6) << p.passed << " / "
            << p.instances << (p.ok() ? "" : "  FAIL") << "\n";
    for (const auto& w : r.warnings) table << "  warning: " << w << "\n";
    reports.push_back(r.to_json());
  }
  table << (ok ? "all properties hold" : "property violations found") << "\n";
  Json j = envelope("lattice-check", Json{{"suite", a.suite}, {"options", o.to_json()}});
  j["ok"] = ok;
  j["reports"] = std::move(reports);
  emit(cx, a.output, j);
  return ok ? kOk : kRefuted;
}

// ---------------------------------------------------------------------------

struct ConstructArgs {
  std::string name, output;
  std::optional<std::uint64_t> E, grid, index_bound, k, rounds, input_bound;
  BudgetFlags budget;
};

int cmd_construct(const Context& cx, const ConstructArgs& a) {
  const auto names = construction_names();
  if (std::find(names.begin(), names.end(), a.name) == names.end())
    throw UsageError("unknown construction '" + a.name + "'");
  ConstructionConfig c = bundled_config(a.name);
  if (a.grid) c.grid = *a.grid;
  if (a.index_bound) c.index_bound = *a.index_bound;
  if (a.k) c.k = *a.k;
  if (a.rounds) c.rounds = *a.rounds;
  if (a.input_bound) c.input_bound = *a.input_bound;
  c.budget = a.budget.resolve(c.budget);
  if (a.E) {
    // keep the curated programs, pad with plain indices
    auto reqs = c.requirements();
    for (std::uint64_t e = reqs.size(); e <= *a.E; ++e) reqs.emplace_back(e);
    reqs.resize(*a.E + 1);
    c.indices = std::move(reqs);
    c.E = *a.E;
  }
  Transcript t;
  try {
    t = run_bundled(a.name, c);
  } catch (const ContractError& e) {
    cx.err << "contract abort: " << e.what() << "\n";
    return kContract;
  }
  const std::string path = a.output.empty() ? a.name + ".transcript.jsonl" : a.output;
  write_file(path, write_transcript(t));
  std::size_t requirement = 0;
  for (const auto& cert : t.certificates) requirement += cert.kind == "requirement";
  cx.out << a.name << ": " << t.certificates.size() << " certificates (" << requirement << " requirement stages), "
         << t.count("satisfied") << " satisfied, " << t.count("presumed") << " presumed, " << t.count("inconclusive")
         << " inconclusive, " << t.count("violated") << " violated\n"
         << "wrote " << path << "\n";
  return t.count("violated") == 0 ? kOk : kRefuted;
}

int cmd_replay(const Context& cx, const std::string& path) {
  auto r = replay_text(read_file(path));
  for (const auto& f : r.failures) {
    if (f.stage < 0) cx.out << "header: " << f.what << "\n";
    else cx.out << "stage " << f.stage << ": " << f.what << "\n";
  }
  cx.out << (r.ok() ? "replay ok" : "replay FAILED") << ": " << r.certificates << " certificates, " << r.checks
         << " checks, " << r.failures.size() << " failures\n";
  return r.ok() ? kOk : kRefuted;
}

// ---------------------------------------------------------------------------

struct JumpArgs {
  std::string f_file, range, output;
  std::vector<std::string> indices, programs;
  bool k0_variant = false;
  BudgetFlags budget;
};

int cmd_jump(const Context& cx, const JumpArgs& a) {
  auto f = read_fn(a.f_file);
  Budget b = a.budget.resolve(Budget(200'000, 16, 10'000));
  std::vector<Nat> rows;
  if (!a.range.empty()) {
    auto c = a.range.find(':');
    if (c == std::string::npos) throw UsageError("--index-range: expected lo:hi");
    Nat lo = parse_nat(a.range.substr(0, c), "--index-range"), hi = parse_nat(a.range.substr(c + 1), "--index-range");
    if (hi > lo + 1'000'000) throw UsageError("--index-range: at most 10^6 rows");
    for (Nat e = lo; e < hi; ++e) rows.push_back(e);
  }
  for (const auto& s : a.indices) rows.push_back(parse_nat(s, "--index"));
  for (const auto& p : a.programs) rows.push_back(encode(read_program(p)));
  if (rows.empty()) throw UsageError("no rows: give --index-range, --index or --program");

  std::vector<JumpAnswer> answers(rows.size());
  const auto count = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < count; ++i) {
    auto k = static_cast<std::size_t>(i);
    answers[k] = a.k0_variant ? k0(f, rows[k], b) : k_jump(f, rows[k], b);
  }

  std::map<std::string, std::uint64_t> counts;
  for (auto kind : {JumpAnswer::Kind::One, JumpAnswer::Kind::ZeroCertified, JumpAnswer::Kind::UndefinedFrozen,
                    JumpAnswer::Kind::Unknown})
    counts[std::string(to_string(kind))] = 0;
  Json table = Json::array();
  std::ostream& text = a.output.empty() ? cx.out : cx.err;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& ans = answers[k];
    std::string kind(to_string(ans.kind));
    ++counts[kind];
    Json row{{"index", nat_json(rows[k])}, {"answer", kind}};
    text << rows[k] << "\t" << kind;
    if (ans.kind == JumpAnswer::Kind::UndefinedFrozen) {
      row["query"] = nat_json(ans.query);
      text << "\tquery " << ans.query;
    }
    if (ans.kind == JumpAnswer::Kind::Unknown) {
      row["reason"] = std::string(to_string(ans.reason));
      text << "\t" << to_string(ans.reason);
    }
    if (ans.k0_zero) {
      row["k0_zero"] = true;
      text << "\tread as 0";
    }
    text << "\n";
    table.push_back(std::move(row));
  }
  for (const auto& [k, v] : counts) text << k << ": " << v << "\n";
  if (!a.output.empty()) {
    Json config{{"f", f.to_json()}, {"rows", nats_json(rows)}, {"variant", a.k0_variant ? "K0" : "K"},
                {"budget", budget_json(b)}};
    Json j = envelope("jump", std::move(config));
    j["rows"] = std::move(table);
    j["counts"] = counts;
    emit(cx, a.output, j);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context cx{out, err, std::nullopt};
  CLI::App app{"Bounded workbench for oracle dialogues, reductions and constructions", "subt"};
  app.require_subcommand(1);
  app.add_option("--jobs", cx.jobs, "OpenMP threads (env SUBT_JOBS); never changes output bytes");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "run one oracle dialogue and print its outcome");
  run_cmd->add_option("--program", ra.program_file, "program text file");
  run_cmd->add_option("--index", ra.index, "program index");
  run_cmd->add_option("--oracle", ra.oracle_file, "partial function JSON (default: empty)");
  run_cmd->add_option("--input", ra.input, "input n");
  run_cmd->add_option("-o,--output", ra.output, "write JSON here instead of stdout");
  ra.budget.attach(run_cmd);

  ReduceArgs rd;
  auto* reduce_cmd = app.add_subcommand("reduce", "search for a witness of f <= g");
  reduce_cmd->add_option("f", rd.f_file, "f as partial function JSON")->required();
  reduce_cmd->add_option("g", rd.g_file, "g as partial function JSON")->required();
  reduce_cmd->add_option("--index-bound", rd.index_bound, "largest index searched");
  reduce_cmd->add_option("--domain", rd.domain, "lo:hi or a,b,c");
  reduce_cmd->add_flag("--no-canonical", rd.no_canonical, "skip the echo check before the search");
  reduce_cmd->add_option("-o,--output", rd.output, "write JSON here instead of stdout");
  rd.budget.attach(reduce_cmd);

  LatticeArgs la;
  auto* lattice_cmd = app.add_subcommand("lattice-check", "randomized property suites");
  lattice_cmd->add_option("--seed", la.seed);
  lattice_cmd->add_option("--grid", la.grid, "random functions live on [0, grid)");
  lattice_cmd->add_option("--instances", la.instances, "instances per property");
  lattice_cmd->add_option("--suite", la.suite, "lattice, dialogue, transitivity, jump, query-extraction or all");
  lattice_cmd->add_option("--inject-bug", la.mutation, "none, join-swap, meet-swap or graph-echo");
  lattice_cmd->add_option("-o,--output", la.output, "write the JSON report here");
  la.budget.attach(lattice_cmd);

  ConstructArgs ca;
  auto* construct_cmd = app.add_subcommand("construct", "run a bundled construction and write its transcript");
  construct_cmd->add_option("name", ca.name, "construction name")->required();
  construct_cmd->add_option("--E", ca.E, "last requirement index");
  construct_cmd->add_option("--grid", ca.grid);
  construct_cmd->add_option("--index-bound", ca.index_bound);
  construct_cmd->add_option("--k", ca.k, "antichain depth");
  construct_cmd->add_option("--stage-rounds", ca.rounds, "nondistributive round cap");
  construct_cmd->add_option("--input-bound", ca.input_bound);
  construct_cmd->add_option("-o,--output", ca.output, "transcript path (default NAME.transcript.jsonl)");
  ca.budget.attach(construct_cmd);

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-verify every certificate of a transcript");
  replay_cmd->add_option("transcript", replay_path)->required();

  JumpArgs ja;
  auto* jump_cmd = app.add_subcommand("jump", "classify rows of the bounded jump K(f)");
  jump_cmd->add_option("f", ja.f_file, "f as partial function JSON")->required();
  jump_cmd->add_option("--index-range", ja.range, "lo:hi");
  jump_cmd->add_option("--index", ja.indices, "extra row index");
  jump_cmd->add_option("--program", ja.programs, "extra row from a program file");
  jump_cmd->add_flag("--k0", ja.k0_variant, "read freezes as 0");
  jump_cmd->add_option("-o,--output", ja.output, "write JSON here");
  ja.budget.attach(jump_cmd);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(std::move(rev));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    apply_jobs(cx);
    if (*run_cmd) return cmd_run(cx, ra);
    if (*reduce_cmd) return cmd_reduce(cx, rd);
    if (*lattice_cmd) return cmd_lattice(cx, la);
    if (*construct_cmd) return cmd_construct(cx, ca);
    if (*replay_cmd) return cmd_replay(cx, replay_path);
    if (*jump_cmd) return cmd_jump(cx, ja);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ContractError& e) {
    err << "contract abort: " << e.what() << "\n";
    return kContract;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace subt::cli
