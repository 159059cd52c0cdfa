#include <doctest.h>

#include "subt/certificate.hpp"

using namespace subt;

namespace {

PartialFn tab(std::map<Nat, Nat> m) { return PartialFn::table(std::move(m)); }

Transcript small_transcript(const Nat& required_value) {
  Transcript t;
  t.construction = "test";
  t.functions.emplace_back("f", tab({{0, 4}, {1, 5}}));
  StageCertificate c;
  const Budget b(1000, 8, 1000);
  c.evidence.push_back(ev::dialogue(encode(echo_program()), name_ref("f"), 1, b,
                                    Json{{"outcome", "halted"}, {"value", nat_json(required_value)}}));
  c.evidence.push_back(ev::values(name_ref("f"), {0, 2}, Json{{"equals", Json::array({Json{{"defined", 4}}, "undefined"})}}));
  t.certificates.push_back(std::move(c));
  finalize(t);
  return t;
}

}  // namespace

TEST_CASE("bounded oracle memoizes and logs once per stage") {
  BoundedHaltingOracle o(Budget(1000, 8, 1000));
  const Nat echo = encode(echo_program());
  auto f = tab({{3, 9}});
  CHECK(o.ask(echo, f, 3).halted());
  CHECK(o.ask(echo, f, 3).value == 9);
  CHECK(o.ask(echo, f, 4).frozen());
  auto log = o.take_log();
  CHECK(log.size() == 2);
  CHECK(o.memo_size() == 2);
  // answered from the memo, but logged again for the new stage
  o.ask(echo, f, 3);
  CHECK(o.take_log().size() == 1);
  CHECK(reask(log[0], {}) == log[0].answer);

  auto many = o.ask_many(echo, f, {Nat(2), Nat(3), Nat(4)});
  REQUIRE(many.size() == 3);
  CHECK(many[0].frozen());
  CHECK(many[1].halted());
  auto l2 = o.take_log();
  REQUIRE(l2.size() == 3);
  CHECK(json_nat(l2[0].question.at("input")) == 2);
  CHECK(json_nat(l2[2].question.at("input")) == 4);
}

TEST_CASE("verdicts") {
  const Budget b(1000, 8, 1000);
  CHECK(verdict_of(run_dialogue(constant_program(1), PartialFn(), 0, b)) == HaltVerdict::Halts);
  CHECK(verdict_of(run_dialogue(echo_program(), PartialFn(), 0, b)) == HaltVerdict::Frozen);
  CHECK(verdict_of(run_dialogue(self_loop_program(), PartialFn(), 0, b)) == HaltVerdict::CertifiedDivergent);
}

TEST_CASE("finalize and replay") {
  auto good = small_transcript(5);
  CHECK(good.certificates[0].status == "satisfied");
  auto text = write_transcript(good);
  CHECK(replay_text(text).ok());
  CHECK(write_transcript(read_transcript(text)) == text);

  auto bad = small_transcript(6);
  CHECK(bad.certificates[0].status == "violated");
  CHECK_FALSE(replay(bad).ok());
}

TEST_CASE("replay notices a changed function") {
  auto t = small_transcript(5);
  auto text = write_transcript(t);
  // f(1) = 5 becomes 7 in the header: the echo run no longer matches
  auto pos = text.find("[1,5]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 5, "[1,7]");
  CHECK_FALSE(replay_text(text).ok());
  CHECK_FALSE(replay_text("not json").ok());
}

TEST_CASE("requirement keys") {
  Json spec{{"require", Json{{"not_value", 3}, {"settled", true}}}};
  Json halted3{{"outcome", "halted"}, {"value", 3}};
  Json halted4{{"outcome", "halted"}, {"value", 4}};
  Json frozen{{"outcome", "frozen"}, {"query", 8}};
  spec["kind"] = "dialogue";
  CHECK_FALSE(evidence_holds(spec, halted3));
  CHECK(evidence_holds(spec, halted4));
  CHECK(evidence_holds(spec, frozen));
  Json q{{"kind", "dialogue"}, {"require", Json{{"query", 8}}}};
  CHECK(evidence_holds(q, frozen));
  CHECK_FALSE(evidence_holds(q, halted3));
}
