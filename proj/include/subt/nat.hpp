#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace subt {

/// Natural number of unbounded size. Program indices routinely exceed 2^64.
using Nat = boost::multiprecision::mpz_int;

Nat nat_from_string(const std::string& s);
std::string to_string(const Nat& n);

/// True when n fits in 64 bits.
bool fits_u64(const Nat& n);
std::uint64_t to_u64(const Nat& n);  // throws std::overflow_error

// Cantor pairing: <x,y> = (x+y)(x+y+1)/2 + y.
Nat cantor_pair(const Nat& x, const Nat& y);
std::pair<Nat, Nat> cantor_unpair(const Nat& z);

// <d,e,n> = <d,<e,n>>
Nat cantor_triple(const Nat& a, const Nat& b, const Nat& c);

// Halt-output decoding: v = 2q + i.
struct HaltPairCode {
  unsigned bit;
  Nat payload;
};
HaltPairCode split_halt_output(const Nat& v);
Nat make_halt_output(unsigned bit, const Nat& payload);

// Size-additive pairing used for operand packing: <x,y> = 2^x (2y + 1) - 1.
// x must fit in 64 bits.
Nat exp_pair(std::uint64_t x, const Nat& y);
std::pair<Nat, Nat> exp_unpair(const Nat& z);

/// Bijection between finite lists of naturals and naturals.
/// 0 is the empty list; otherwise 1 + (bijective base-3 value of the
/// '#'-joined bijective-binary spellings of the elements).
Nat seq_encode(const std::vector<Nat>& xs);
std::vector<Nat> seq_decode(const Nat& code);

/// Appends x to the list coded by code, without a full decode/encode round trip.
Nat seq_snoc(const Nat& code, const Nat& x);

/// Element k of the list coded by code, or 0 when k is out of range.
Nat seq_nth(const Nat& code, const Nat& k);

std::size_t seq_length(const Nat& code);

// Bijective binary spelling: x <-> bits of (x+1) without the leading 1,
// most significant first.
std::string bijective_binary(const Nat& x);
Nat from_bijective_binary(const std::string& bits);

// Bijective base-3 over the alphabet {'0','1','#'} (digits 1,2,3).
std::string bijective_ternary(const Nat& v);
Nat from_bijective_ternary(const std::string& s);

}  // namespace subt
