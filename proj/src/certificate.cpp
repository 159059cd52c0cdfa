#include "subt/certificate.hpp"

#include <algorithm>
#include <sstream>

#include "subt/search.hpp"

namespace subt {

std::string_view to_string(HaltVerdict v) {
  switch (v) {
    case HaltVerdict::Halts: return "halts";
    case HaltVerdict::Frozen: return "frozen";
    case HaltVerdict::CertifiedDivergent: return "certified_divergent";
    case HaltVerdict::NoHaltByBudget: return "no_halt_by_budget";
  }
  return "?";
}

HaltVerdict verdict_of(const DialogueOutcome& o) {
  if (o.halted()) return HaltVerdict::Halts;
  if (o.frozen()) return HaltVerdict::Frozen;
  if (o.divergence_certified) return HaltVerdict::CertifiedDivergent;
  return HaltVerdict::NoHaltByBudget;
}

namespace {

Json oracle_answer(const DialogueOutcome& o) {
  Json a;
  a["verdict"] = std::string(to_string(verdict_of(o)));
  a["outcome"] = outcome_json(o);
  return a;
}

std::vector<Json> nat_array(const std::vector<Nat>& xs) {
  std::vector<Json> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(nat_json(x));
  return out;
}

std::vector<Nat> nats_of(const Json& j) {
  std::vector<Nat> out;
  for (const auto& x : j) out.push_back(json_nat(x));
  return out;
}

}  // namespace

Json BoundedHaltingOracle::question(const Nat& p, const PartialFn& sigma, const Nat& n) {
  Json q;
  q["program"] = nat_json(p);
  q["oracle"] = sigma.to_json();
  q["input"] = nat_json(n);
  return q;
}

void BoundedHaltingOracle::note(const std::string& key, const Json& q, const DialogueOutcome& o) {
  if (!logged_.insert(key).second) return;
  log_.push_back({q, oracle_answer(o), budget_});
}

const DialogueOutcome& BoundedHaltingOracle::ask(const Nat& p, const PartialFn& sigma, const Nat& n) {
  Json q = question(p, sigma, n);
  std::string key = dump(q);
  auto it = memo_.find(key);
  if (it == memo_.end()) it = memo_.emplace(key, run_dialogue(*compile_index(p), sigma, n, budget_)).first;
  note(key, q, it->second);
  return it->second;
}

std::vector<DialogueOutcome> BoundedHaltingOracle::ask_many(const Nat& p, const PartialFn& sigma,
                                                            const std::vector<Nat>& inputs) {
  std::vector<Json> qs(inputs.size());
  std::vector<std::string> keys(inputs.size());
  std::vector<DialogueOutcome> out(inputs.size());
  std::vector<char> cached(inputs.size(), 0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    qs[i] = question(p, sigma, inputs[i]);
    keys[i] = dump(qs[i]);
    auto it = memo_.find(keys[i]);
    if (it != memo_.end()) {
      out[i] = it->second;
      cached[i] = 1;
    }
  }
  auto prog = compile_index(p);
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    if (!cached[i]) out[i] = run_dialogue(*prog, sigma, inputs[i], budget_);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    memo_.emplace(keys[i], out[i]);
    note(keys[i], qs[i], out[i]);
  }
  return out;
}

std::vector<OracleLogEntry> BoundedHaltingOracle::take_log() {
  logged_.clear();
  return std::exchange(log_, {});
}

Json reask(const OracleLogEntry& e, const std::map<std::string, PartialFn>& refs) {
  const Json& q = e.question;
  PartialFn sigma = PartialFn::from_json(q.at("oracle"), refs);
  auto o = run_dialogue(*compile_index(json_nat(q.at("program"))), sigma, json_nat(q.at("input")), e.budget);
  return oracle_answer(o);
}

// ---------------------------------------------------------------------------
// evidence

PartialFn name_ref(const std::string& name) { return PartialFn::ref(name, PartialFn()); }

namespace ev {

Json dialogue(const Nat& p, const PartialFn& oracle, const Nat& input, const Budget& b, Json require) {
  Json j;
  j["kind"] = "dialogue";
  j["program"] = nat_json(p);
  j["oracle"] = oracle.to_json();
  j["input"] = nat_json(input);
  j["budget"] = budget_json(b);
  j["require"] = std::move(require);
  return j;
}

Json same_run(const Nat& p, const Nat& input, const Budget& b, const PartialFn& a, const PartialFn& c,
              Json require) {
  Json j;
  j["kind"] = "same_run";
  j["program"] = nat_json(p);
  j["input"] = nat_json(input);
  j["budget"] = budget_json(b);
  j["oracles"] = Json::array({a.to_json(), c.to_json()});
  j["require"] = std::move(require);
  return j;
}

Json values(const PartialFn& fn, const std::vector<Nat>& points, Json require) {
  Json j;
  j["kind"] = "values";
  j["fn"] = fn.to_json();
  j["points"] = nat_array(points);
  j["require"] = std::move(require);
  return j;
}

Json member(const std::string& set, const std::vector<Nat>& points, Json require) {
  Json j;
  j["kind"] = "member";
  j["set"] = set;
  j["points"] = nat_array(points);
  j["require"] = std::move(require);
  return j;
}

Json ce(const Nat& p, const PartialFn& oracle, std::uint64_t bound, const Budget& b, Json require) {
  Json j;
  j["kind"] = "ce";
  j["program"] = nat_json(p);
  j["oracle"] = oracle.to_json();
  j["bound"] = bound;
  j["budget"] = budget_json(b);
  j["require"] = std::move(require);
  return j;
}

Json jump(const PartialFn& oracle, const Nat& p, const Budget& b, Json require) {
  Json j;
  j["kind"] = "jump";
  j["oracle"] = oracle.to_json();
  j["program"] = nat_json(p);
  j["budget"] = budget_json(b);
  j["require"] = std::move(require);
  return j;
}

Json verify(const Nat& p, const PartialFn& f, const PartialFn& g, const std::vector<Nat>& domain, const Budget& b,
            Json require) {
  Json j;
  j["kind"] = "verify";
  j["program"] = nat_json(p);
  j["f"] = f.to_json();
  j["g"] = g.to_json();
  j["domain"] = nat_array(domain);
  j["budget"] = budget_json(b);
  j["require"] = std::move(require);
  return j;
}

Json search(const PartialFn& f, const PartialFn& g, const Nat& bound, const std::vector<Nat>& domain,
            const Budget& b, Json require) {
  Json j;
  j["kind"] = "search";
  j["f"] = f.to_json();
  j["g"] = g.to_json();
  j["bound"] = nat_json(bound);
  j["domain"] = nat_array(domain);
  j["budget"] = budget_json(b);
  j["require"] = std::move(require);
  return j;
}

}  // namespace ev

Json answer_json(const OracleAnswer& a) {
  switch (a.kind) {
    case OracleAnswer::Kind::Defined: return Json{{"defined", nat_json(a.value)}};
    case OracleAnswer::Kind::Undefined: return "undefined";
    case OracleAnswer::Kind::Unknown: return "unknown";
  }
  return "unknown";
}

Json evaluate_evidence(const Json& spec, const FnRefs& fns, const SetRefs& sets) {
  auto kind = spec.at("kind").get<std::string>();
  auto fn = [&](const char* key) { return PartialFn::from_json(spec.at(key), fns); };
  auto budget = [&] { return json_budget(spec.at("budget")); };
  if (kind == "dialogue") {
    auto p = compile_index(json_nat(spec.at("program")));
    return outcome_json(run_dialogue(*p, fn("oracle"), json_nat(spec.at("input")), budget()));
  }
  if (kind == "same_run") {
    auto p = compile_index(json_nat(spec.at("program")));
    Nat n = json_nat(spec.at("input"));
    Budget b = budget();
    const Json& os = spec.at("oracles");
    auto a = run_dialogue(*p, PartialFn::from_json(os.at(0), fns), n, b);
    auto c = run_dialogue(*p, PartialFn::from_json(os.at(1), fns), n, b);
    Json r;
    r["same"] = a == c;
    r["outcome"] = outcome_json(a);
    return r;
  }
  if (kind == "values") {
    PartialFn f = fn("fn");
    Json r = Json::array();
    for (const auto& x : spec.at("points")) r.push_back(answer_json(f.eval(json_nat(x))));
    return r;
  }
  if (kind == "member") {
    auto name = spec.at("set").get<std::string>();
    auto it = sets.find(name);
    if (it == sets.end()) throw std::invalid_argument("unresolved set '" + name + "'");
    Json r = Json::array();
    for (const auto& x : spec.at("points")) r.push_back(it->second.count(json_nat(x)) > 0);
    return r;
  }
  if (kind == "ce") {
    auto xs = ce_enumerate(json_nat(spec.at("program")), fn("oracle"), spec.at("bound").get<std::uint64_t>(),
                           budget());
    Json r = Json::array();
    for (const auto& x : xs) r.push_back(nat_json(x));
    return r;
  }
  if (kind == "jump") {
    auto a = k_jump(fn("oracle"), json_nat(spec.at("program")), budget());
    Json r;
    r["answer"] = std::string(to_string(a.kind));
    if (a.kind == JumpAnswer::Kind::UndefinedFrozen) r["query"] = nat_json(a.query);
    if (a.kind == JumpAnswer::Kind::Unknown) r["reason"] = std::string(to_string(a.reason));
    return r;
  }
  if (kind == "verify") {
    auto rep = verify_reduction_index(json_nat(spec.at("program")), fn("f"), fn("g"), nats_of(spec.at("domain")),
                                      budget());
    Json r;
    r["verdict"] = std::string(to_string(rep.verdict));
    r["digest"] = hex64(fnv1a64(dump(verify_json(rep))));
    return r;
  }
  if (kind == "search") {
    auto res = search_reduction(fn("f"), fn("g"), json_nat(spec.at("bound")), nats_of(spec.at("domain")), budget());
    Json r;
    r["found"] = res.found();
    if (res.found()) r["index"] = nat_json(res.witness->index);
    r["failures"] = res.certificate.failures.size();
    r["unknown"] = res.certificate.unknown_count;
    r["digest"] = hex64(fnv1a64(dump(search_json(res))));
    return r;
  }
  throw std::invalid_argument("unknown evidence kind '" + kind + "'");
}

namespace {

const Json* outcome_view(const Json& spec, const Json& result) {
  auto kind = spec.at("kind").get<std::string>();
  if (kind == "dialogue") return &result;
  if (kind == "same_run") return &result.at("outcome");
  return nullptr;
}

bool halted_with(const Json& o, const Json& v) {
  return o.at("outcome") == "halted" && json_nat(o.at("value")) == json_nat(v);
}

}  // namespace

bool evidence_holds(const Json& spec, const Json& result) {
  if (!spec.contains("require")) return true;
  const Json& req = spec.at("require");
  const Json* o = outcome_view(spec, result);
  for (const auto& [key, want] : req.items()) {
    bool ok = true;
    if (key == "outcome") {
      ok = o && o->at("outcome") == want;
    } else if (key == "value") {
      ok = o && halted_with(*o, want);
    } else if (key == "not_value") {
      ok = o && !halted_with(*o, want);
    } else if (key == "query") {
      ok = o && o->at("outcome") == "frozen" && json_nat(o->at("query")) == json_nat(want);
    } else if (key == "settled") {
      ok = o && (o->at("outcome") != "exhausted" || o->value("certified", false)) == want.get<bool>();
    } else if (key == "not_halted") {
      ok = o && (o->at("outcome") != "halted") == want.get<bool>();
    } else if (key == "reason") {
      ok = o && o->at("outcome") == "exhausted" && o->at("reason") == want;
    } else if (key == "same") {
      ok = result.at("same") == want;
    } else if (key == "equals") {
      ok = result == want;
    } else if (key == "contains") {
      std::set<Nat> have;
      for (const auto& x : result) have.insert(json_nat(x));
      for (const auto& x : want) ok = ok && have.count(json_nat(x)) > 0;
    } else if (key == "answer" || key == "verdict" || key == "found") {
      ok = result.at(key) == want;
    } else {
      throw std::invalid_argument("unknown requirement '" + key + "'");
    }
    if (!ok) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// certificates and transcripts

namespace {

Json body_json(const StageCertificate& c) {
  Json j;
  j["stage"] = c.stage;
  j["kind"] = c.kind;
  j["status"] = c.status;
  j["action"] = c.action;
  j["evidence"] = c.evidence;
  Json os = Json::array();
  for (const auto& e : c.oracle_answers) {
    Json x;
    x["question"] = e.question;
    x["answer"] = e.answer;
    x["budget"] = budget_json(e.budget);
    os.push_back(std::move(x));
  }
  j["oracle"] = std::move(os);
  return j;
}

}  // namespace

std::string StageCertificate::digest() const { return hex64(fnv1a64(dump(body_json(*this)))); }

Json StageCertificate::to_json() const {
  Json j = body_json(*this);
  j["digest"] = digest();
  return j;
}

StageCertificate StageCertificate::from_json(const Json& j) {
  StageCertificate c;
  c.stage = j.at("stage").get<std::uint64_t>();
  c.kind = j.at("kind").get<std::string>();
  c.status = j.at("status").get<std::string>();
  c.action = j.at("action");
  for (const auto& e : j.at("evidence")) c.evidence.push_back(e);
  for (const auto& x : j.at("oracle")) c.oracle_answers.push_back({x.at("question"), x.at("answer"), json_budget(x.at("budget"))});
  return c;
}

const PartialFn& Transcript::fn(std::string_view name) const {
  for (const auto& [n, f] : functions)
    if (n == name) return f;
  throw std::out_of_range("no function '" + std::string(name) + "' in transcript");
}

const std::set<Nat>& Transcript::set(std::string_view name) const {
  auto it = sets.find(std::string(name));
  if (it == sets.end()) throw std::out_of_range("no set '" + std::string(name) + "' in transcript");
  return it->second;
}

FnRefs Transcript::fn_refs() const {
  FnRefs refs;
  for (const auto& [n, f] : functions) refs[n] = f;
  return refs;
}

Json Transcript::header() const {
  Json h;
  h["schema"] = kTranscriptSchema;
  h["construction"] = construction;
  h["config"] = config;
  Json fs = Json::array();
  for (const auto& [n, f] : functions) fs.push_back(Json{{"name", n}, {"fn", f.to_json()}});
  h["functions"] = std::move(fs);
  Json ss = Json::object();
  for (const auto& [n, s] : sets) {
    Json xs = Json::array();
    for (const auto& x : s) xs.push_back(nat_json(x));
    ss[n] = std::move(xs);
  }
  h["sets"] = std::move(ss);
  h["params"] = params;
  return h;
}

std::size_t Transcript::count(std::string_view status) const {
  return static_cast<std::size_t>(
      std::count_if(certificates.begin(), certificates.end(), [&](const auto& c) { return c.status == status; }));
}

std::string write_transcript(const Transcript& t) {
  std::string out = "{\"header\":" + dump(t.header()) + ",\n\"certificates\":[\n";
  for (std::size_t i = 0; i < t.certificates.size(); ++i) {
    out += dump(t.certificates[i].to_json());
    out += i + 1 < t.certificates.size() ? ",\n" : "\n";
  }
  out += "]}\n";
  return out;
}

namespace {

struct ParsedLines {
  Json header;
  std::vector<std::pair<std::size_t, std::string>> certs;  // line number, text
};

ParsedLines split_transcript(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  const std::string head = "{\"header\":";
  if (lines.size() < 3 || lines[0].rfind(head, 0) != 0 || lines[0].back() != ',' ||
      lines[1] != "\"certificates\":[" || lines.back() != "]}")
    throw std::invalid_argument("transcript framing is damaged");
  ParsedLines p;
  p.header = Json::parse(lines[0].substr(head.size(), lines[0].size() - head.size() - 1));
  for (std::size_t i = 2; i + 1 < lines.size(); ++i) {
    std::string l = lines[i];
    bool last = i + 2 == lines.size();
    if (!last) {
      if (l.empty() || l.back() != ',') throw std::invalid_argument("transcript framing is damaged");
      l.pop_back();
    }
    p.certs.emplace_back(i, std::move(l));
  }
  return p;
}

void load_header(Transcript& t, const Json& h) {
  if (h.at("schema").get<int>() != kTranscriptSchema) throw std::invalid_argument("unsupported transcript schema");
  t.construction = h.at("construction").get<std::string>();
  t.config = h.at("config");
  FnRefs refs;
  for (const auto& e : h.at("functions")) {
    auto name = e.at("name").get<std::string>();
    PartialFn f = PartialFn::from_json(e.at("fn"), refs);
    refs[name] = f;
    t.functions.emplace_back(name, f);
  }
  for (const auto& [n, xs] : h.at("sets").items()) {
    std::set<Nat> s;
    for (const auto& x : xs) s.insert(json_nat(x));
    t.sets[n] = std::move(s);
  }
  t.params = h.at("params");
}

}  // namespace

Transcript read_transcript(std::string_view text) {
  ParsedLines p = split_transcript(text);
  Transcript t;
  load_header(t, p.header);
  for (const auto& [line, s] : p.certs) {
    Json j = Json::parse(s);
    auto c = StageCertificate::from_json(j);
    if (j.at("digest").get<std::string>() != c.digest())
      throw std::invalid_argument("certificate digest mismatch on line " + std::to_string(line + 1));
    t.certificates.push_back(std::move(c));
  }
  return t;
}

void finalize(Transcript& t) {
  FnRefs fns = t.fn_refs();
  for (auto& c : t.certificates) {
    bool ok = true;
    for (auto& e : c.evidence) {
      // hypotheses were evaluated when checked and concern unchanged inputs
      if (!e.contains("result")) e["result"] = evaluate_evidence(e, fns, t.sets);
      ok = ok && evidence_holds(e, e.at("result"));
    }
    if (!ok && c.status != "inconclusive") c.status = "violated";
  }
}

namespace {

void replay_certificate(const StageCertificate& c, const FnRefs& fns, const SetRefs& sets, ReplayReport& rep) {
  auto fail = [&](std::string what) { rep.failures.push_back({static_cast<std::int64_t>(c.stage), std::move(what)}); };
  if (c.status == "violated") fail("certificate records a violated requirement");
  for (std::size_t i = 0; i < c.evidence.size(); ++i) {
    Json spec = c.evidence[i];
    ++rep.checks;
    try {
      Json recorded = spec.at("result");
      spec.erase("result");
      Json r = evaluate_evidence(spec, fns, sets);
      if (dump(r) != dump(recorded))
        fail("evidence " + std::to_string(i) + " (" + spec.at("kind").get<std::string>() + ") does not reproduce");
      else if (!evidence_holds(spec, r) && c.status != "inconclusive")
        fail("evidence " + std::to_string(i) + " fails its requirement");
    } catch (const std::exception& ex) {
      fail("evidence " + std::to_string(i) + ": " + ex.what());
    }
  }
  for (std::size_t i = 0; i < c.oracle_answers.size(); ++i) {
    ++rep.checks;
    try {
      if (dump(reask(c.oracle_answers[i], fns)) != dump(c.oracle_answers[i].answer))
        fail("oracle answer " + std::to_string(i) + " does not reproduce");
    } catch (const std::exception& ex) {
      fail("oracle answer " + std::to_string(i) + ": " + ex.what());
    }
  }
}

}  // namespace

ReplayReport replay(const Transcript& t) {
  ReplayReport rep;
  FnRefs fns = t.fn_refs();
  for (std::size_t i = 0; i < t.certificates.size(); ++i) {
    const auto& c = t.certificates[i];
    ++rep.certificates;
    if (c.stage != i) rep.failures.push_back({static_cast<std::int64_t>(i), "stage numbers out of sequence"});
    replay_certificate(c, fns, t.sets, rep);
  }
  return rep;
}

ReplayReport replay_text(std::string_view text) {
  ReplayReport rep;
  ParsedLines p;
  Transcript t;
  try {
    p = split_transcript(text);
    load_header(t, p.header);
  } catch (const std::exception& ex) {
    rep.failures.push_back({-1, std::string("header: ") + ex.what()});
    return rep;
  }
  FnRefs fns = t.fn_refs();
  for (std::size_t i = 0; i < p.certs.size(); ++i) {
    ++rep.certificates;
    StageCertificate c;
    try {
      Json j = Json::parse(p.certs[i].second);
      c = StageCertificate::from_json(j);
      if (j.at("digest").get<std::string>() != c.digest())
        rep.failures.push_back({static_cast<std::int64_t>(i), "digest mismatch"});
    } catch (const std::exception& ex) {
      rep.failures.push_back({static_cast<std::int64_t>(i), std::string("unreadable certificate: ") + ex.what()});
      continue;
    }
    if (c.stage != i) rep.failures.push_back({static_cast<std::int64_t>(i), "stage numbers out of sequence"});
    replay_certificate(c, fns, t.sets, rep);
  }
  return rep;
}

}  // namespace subt
