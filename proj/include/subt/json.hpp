#pragma once

#include <json.hpp>

#include "subt/machine.hpp"

namespace subt {

using Json = nlohmann::ordered_json;

/// Naturals are numbers when they fit in 64 bits, decimal strings otherwise.
Json nat_json(const Nat& n);
Nat json_nat(const Json& j);  // accepts both forms; throws std::invalid_argument

Json budget_json(const Budget& b);
Budget json_budget(const Json& j);

/// {outcome, value|query|reason, certified?, trace, steps}
Json outcome_json(const DialogueOutcome& o);
DialogueOutcome json_outcome(const Json& j);

/// Compact dump with sorted-free, insertion-ordered keys.
std::string dump(const Json& j);

/// FNV-1a, 64 bit, over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace subt
