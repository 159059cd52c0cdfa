#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "subt/json.hpp"
#include "subt/partialfn.hpp"

namespace subt {

// Randomized property suites over finite partial functions and random
// programs. Instance i draws from an RNG seeded with (seed, i), so results do
// not depend on the thread count.

/// Deliberate bugs for checking that the lattice suite can fail.
enum class Mutation : std::uint8_t { None, JoinSwap, MeetSwap, GraphEcho };
std::string_view to_string(Mutation m);
Mutation parse_mutation(std::string_view s);  // throws std::invalid_argument
std::vector<std::string> mutation_names();

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::uint64_t instances = 1000;  // per property
  std::uint64_t grid = 64;         // random functions live on [0, grid)
  Budget budget{20'000, 64, 100'000};
  Mutation mutation = Mutation::None;

  Json to_json() const;
};

struct PropertyTally {
  std::string name;
  std::uint64_t instances = 0;
  std::uint64_t passed = 0;
  Json first_failure;  // null while everything passes

  bool ok() const { return passed == instances; }
};

struct PropertyReport {
  std::string suite;
  Json options;
  std::vector<PropertyTally> properties;
  std::vector<std::string> warnings;

  bool ok() const;
  std::uint64_t instances() const;
  const PropertyTally& get(std::string_view name) const;
  Json to_json() const;
};

std::mt19937_64 instance_rng(std::uint64_t seed, std::uint64_t i);
/// Each point of [0, grid) defined with probability density, values below value_bound.
std::map<Nat, Nat> random_table(std::mt19937_64& rng, std::uint64_t grid, double density, std::uint64_t value_bound);
/// At most max_len instructions, registers 0..6, small constants, no SIM.
Program random_program(std::mt19937_64& rng, std::size_t max_len);

/// Determinism, use principle, monotonicity, freeze exactness, budget
/// monotonicity. Programs of at most 20 instructions, oracles of at most 16 points.
PropertyReport dialogue_suite(const SuiteOptions& o);
/// Join projections and least upper bound, meet lower bounds and
/// universality, graph encoding both ways (instances / 10 for the graph).
PropertyReport lattice_suite(const SuiteOptions& o);
/// compose() on random witnessed chains f <= g <= h.
PropertyReport transitivity_suite(const SuiteOptions& o);
/// f <= K(f) through the inflation witness, monotone transfer against nested
/// simulation on a fixed corpus, K = K0 on total oracles.
PropertyReport jump_suite(const SuiteOptions& o);
/// Witnesses against join oracles survive restriction to the traced f-queries
/// and hard-coding of those values.
PropertyReport query_extraction_suite(const SuiteOptions& o);

}  // namespace subt
