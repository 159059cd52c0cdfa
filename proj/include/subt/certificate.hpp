#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "subt/json.hpp"
#include "subt/partialfn.hpp"

namespace subt {

inline constexpr int kTranscriptSchema = 1;

/// A construction refused to start: its hypotheses fail at the working bounds.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class HaltVerdict : std::uint8_t { Halts, Frozen, CertifiedDivergent, NoHaltByBudget };
std::string_view to_string(HaltVerdict v);
HaltVerdict verdict_of(const DialogueOutcome& o);

struct OracleLogEntry {
  Json question;  // {program, oracle, input}
  Json answer;    // {verdict, outcome}
  Budget budget{1, 1, 1};
};

/// Stand-in for the halting problem: answers "what does Phi_p[sigma](n) do
/// within B" and logs every distinct question of the current stage.
class BoundedHaltingOracle {
 public:
  explicit BoundedHaltingOracle(const Budget& b) : budget_(b) {}

  const Budget& budget() const { return budget_; }

  const DialogueOutcome& ask(const Nat& p, const PartialFn& sigma, const Nat& n);
  /// Same questions for several inputs; runs them in parallel, logs in input order.
  std::vector<DialogueOutcome> ask_many(const Nat& p, const PartialFn& sigma, const std::vector<Nat>& inputs);

  /// Entries logged since the previous call.
  std::vector<OracleLogEntry> take_log();
  std::size_t memo_size() const { return memo_.size(); }

 private:
  static Json question(const Nat& p, const PartialFn& sigma, const Nat& n);
  void note(const std::string& key, const Json& q, const DialogueOutcome& o);

  Budget budget_;
  std::map<std::string, DialogueOutcome> memo_;
  std::set<std::string> logged_;
  std::vector<OracleLogEntry> log_;
};

/// Re-asks a logged question with its recorded budget.
Json reask(const OracleLogEntry& e, const std::map<std::string, PartialFn>& refs);

// ---------------------------------------------------------------------------
// Evidence. A spec names what to run; functions inside it are PartialFn JSON
// whose refs resolve against the transcript header. The result is filled in
// once the construction has finished, so it reflects the final functions.

using FnRefs = std::map<std::string, PartialFn>;
using SetRefs = std::map<std::string, std::set<Nat>>;

/// Placeholder ref used to write specs before the target exists.
PartialFn name_ref(const std::string& name);

namespace ev {
Json dialogue(const Nat& p, const PartialFn& oracle, const Nat& input, const Budget& b, Json require);
Json same_run(const Nat& p, const Nat& input, const Budget& b, const PartialFn& a, const PartialFn& c, Json require);
Json values(const PartialFn& fn, const std::vector<Nat>& points, Json require);
Json member(const std::string& set, const std::vector<Nat>& points, Json require);
Json ce(const Nat& p, const PartialFn& oracle, std::uint64_t bound, const Budget& b, Json require);
Json jump(const PartialFn& oracle, const Nat& p, const Budget& b, Json require);
Json verify(const Nat& p, const PartialFn& f, const PartialFn& g, const std::vector<Nat>& domain, const Budget& b,
            Json require);
Json search(const PartialFn& f, const PartialFn& g, const Nat& bound, const std::vector<Nat>& domain,
            const Budget& b, Json require);
}  // namespace ev

Json answer_json(const OracleAnswer& a);
Json evaluate_evidence(const Json& spec, const FnRefs& fns, const SetRefs& sets);
/// Whether result satisfies spec["require"].
bool evidence_holds(const Json& spec, const Json& result);

// ---------------------------------------------------------------------------

struct StageCertificate {
  std::uint64_t stage = 0;
  std::string kind = "requirement";  // precondition | requirement | postcondition
  std::string status = "satisfied";  // satisfied | inconclusive | presumed | violated
  Json action = Json::object();
  std::vector<Json> evidence;  // spec plus "result"
  std::vector<OracleLogEntry> oracle_answers;

  /// Body without the digest, then "digest" over its compact dump.
  Json to_json() const;
  static StageCertificate from_json(const Json& j);
  std::string digest() const;
};

struct Transcript {
  std::string construction;
  Json config = Json::object();
  std::vector<std::pair<std::string, PartialFn>> functions;  // later entries may ref earlier ones
  SetRefs sets;
  Json params = Json::object();  // construction outputs worth reading (a_k, restraints)
  std::vector<StageCertificate> certificates;

  const PartialFn& fn(std::string_view name) const;
  const std::set<Nat>& set(std::string_view name) const;
  FnRefs fn_refs() const;
  Json header() const;
  std::size_t count(std::string_view status) const;
};

/// {"header":..., "certificates":[...]} with one certificate per line.
std::string write_transcript(const Transcript& t);
Transcript read_transcript(std::string_view text);

/// Evaluates every evidence spec that has no result yet against the final
/// functions and marks certificates whose requirements fail as violated.
void finalize(Transcript& t);

struct ReplayFailure {
  std::int64_t stage = -1;  // -1: header or framing
  std::string what;
};

struct ReplayReport {
  std::size_t certificates = 0;
  std::size_t checks = 0;
  std::vector<ReplayFailure> failures;
  bool ok() const { return failures.empty(); }
};

ReplayReport replay(const Transcript& t);
/// Parses first; a parse error becomes a failure rather than an exception.
ReplayReport replay_text(std::string_view text);

}  // namespace subt
