#include <doctest.h>

#include <map>

#include "subt/nat.hpp"

using namespace subt;

TEST_CASE("cantor pairing matches diagonal enumeration") {
  // walk the diagonals in order and count
  std::uint64_t z = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    for (std::uint64_t y = 0; y <= s; ++y, ++z) {
      std::uint64_t x = s - y;
      CHECK(cantor_pair(x, y) == z);
      auto [a, b] = cantor_unpair(z);
      CHECK(a == x);
      CHECK(b == y);
    }
  }
}

TEST_CASE("cantor unpair on large values") {
  Nat x = Nat(1) << 200, y = (Nat(1) << 150) + 17;
  auto [a, b] = cantor_unpair(cantor_pair(x, y));
  CHECK(a == x);
  CHECK(b == y);
}

TEST_CASE("halt output split") {
  CHECK(make_halt_output(1, 7) == 15);
  auto h = split_halt_output(10);
  CHECK(h.bit == 0);
  CHECK(h.payload == 5);
}

TEST_CASE("exp pairing is a bijection on a prefix") {
  for (std::uint64_t z = 0; z < 5000; ++z) {
    auto [x, y] = exp_unpair(z);
    CHECK(exp_pair(static_cast<std::uint64_t>(x), y) == z);
  }
}

TEST_CASE("bijective spellings") {
  CHECK(bijective_binary(0) == "");
  CHECK(bijective_binary(1) == "0");
  CHECK(bijective_binary(2) == "1");
  CHECK(bijective_binary(3) == "00");
  for (unsigned v = 0; v < 3000; ++v) {
    CHECK(from_bijective_binary(bijective_binary(v)) == v);
    CHECK(from_bijective_ternary(bijective_ternary(v)) == v);
  }
}

TEST_CASE("list codes: exhaustive bijection below 10^4") {
  for (unsigned c = 0; c < 10000; ++c) {
    auto xs = seq_decode(c);
    REQUIRE(seq_encode(xs) == c);
    CHECK(seq_length(c) == xs.size());
    for (std::size_t k = 0; k <= xs.size(); ++k) CHECK(seq_nth(c, k) == (k < xs.size() ? xs[k] : Nat(0)));
  }
}

TEST_CASE("list codes are distinct for distinct short lists") {
  std::map<Nat, std::vector<Nat>> seen;
  std::vector<std::vector<Nat>> lists = {{}};
  for (int len = 1; len <= 3; ++len) {
    std::vector<std::vector<Nat>> next;
    for (auto l : lists) {
      if (l.size() + 1 != static_cast<std::size_t>(len)) continue;
      for (unsigned x = 0; x < 6; ++x) {
        auto m = l;
        m.push_back(x);
        next.push_back(m);
      }
    }
    lists.insert(lists.end(), next.begin(), next.end());
  }
  for (const auto& l : lists) {
    Nat c = seq_encode(l);
    auto [it, fresh] = seen.emplace(c, l);
    CHECK((fresh || it->second == l));
    CHECK(seq_decode(c) == l);
  }
}

TEST_CASE("snoc agrees with re-encoding") {
  for (unsigned c = 0; c < 2000; ++c) {
    auto xs = seq_decode(c);
    for (unsigned x : {0u, 1u, 5u, 100u}) {
      auto ys = xs;
      ys.push_back(x);
      CHECK(seq_snoc(c, x) == seq_encode(ys));
    }
  }
}

TEST_CASE("naturals parse and print") {
  CHECK(nat_from_string("123456789012345678901234567890") > Nat(1) << 64);
  CHECK_THROWS(nat_from_string("-3"));
  CHECK_THROWS(nat_from_string(""));
  CHECK(fits_u64(Nat(~std::uint64_t{0})));
  CHECK_FALSE(fits_u64(Nat(1) << 64));
}
