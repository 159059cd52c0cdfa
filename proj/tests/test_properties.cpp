#include <doctest.h>

#include "subt/properties.hpp"

using namespace subt;

namespace {

SuiteOptions small() {
  SuiteOptions o;
  o.instances = 150;
  o.grid = 24;
  return o;
}

}  // namespace

TEST_CASE("random programs stay within registers 0..6 and never simulate") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = instance_rng(9, i);
    auto p = random_program(rng, 20);
    REQUIRE(!p.code.empty());
    CHECK(p.code.size() <= 20);
    for (const auto& ins : p.code) {
      CHECK(ins.op != Op::Sim);
      if (ins.op == Op::Set || ins.op == Op::Jmp) continue;
      for (std::size_t k = 0; k < arity(ins.op); ++k) {
        if ((ins.op == Op::Decj && k == 1) || (ins.op == Op::Jeq && k == 2)) continue;
        CHECK(ins.arg[k] <= 6);
      }
    }
  }
}

TEST_CASE("instance rngs depend only on seed and index") {
  auto a = instance_rng(3, 17), b = instance_rng(3, 17), c = instance_rng(3, 18);
  auto x = a();
  CHECK(x == b());
  CHECK(x != c());
}

TEST_CASE("suites pass on the real operators") {
  auto o = small();
  for (auto suite : {dialogue_suite, lattice_suite, transitivity_suite, jump_suite, query_extraction_suite}) {
    auto r = suite(o);
    INFO(r.to_json().dump());
    CHECK(r.ok());
    CHECK(r.instances() > 0);
  }
}

TEST_CASE("dialogue suite reaches its quota for every property") {
  auto r = dialogue_suite(small());
  for (const auto& p : r.properties) CHECK(p.instances == 150);
  CHECK(r.warnings.empty());
}

TEST_CASE("mutations are caught") {
  auto o = small();
  o.mutation = Mutation::JoinSwap;
  CHECK_FALSE(lattice_suite(o).get("join_left").ok());
  o.mutation = Mutation::MeetSwap;
  CHECK_FALSE(lattice_suite(o).get("meet_lower_left").ok());
  o.mutation = Mutation::GraphEcho;
  auto r = lattice_suite(o);
  CHECK_FALSE(r.get("graph_forward").ok());
  CHECK(r.get("join_left").ok());
  CHECK_FALSE(r.get("graph_forward").first_failure.is_null());
}

TEST_CASE("mutation names round trip") {
  for (const auto& n : mutation_names()) CHECK(to_string(parse_mutation(n)) == n);
  CHECK_THROWS_AS(parse_mutation("nope"), std::invalid_argument);
}

TEST_CASE("empty grid passes vacuously with a warning") {
  auto o = small();
  o.grid = 0;
  auto r = lattice_suite(o);
  CHECK(r.ok());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("reports are reproducible") {
  auto o = small();
  o.seed = 42;
  CHECK(lattice_suite(o).to_json() == lattice_suite(o).to_json());
  CHECK(dialogue_suite(o).to_json() == dialogue_suite(o).to_json());
}
