#include "subt/nat.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace subt {

namespace mp = boost::multiprecision;

Nat nat_from_string(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw std::invalid_argument("not a natural number: '" + s + "'");
  return Nat(s);
}

std::string to_string(const Nat& n) { return n.str(); }

bool fits_u64(const Nat& n) { return n >= 0 && (n == 0 || mp::msb(n) < 64); }

std::uint64_t to_u64(const Nat& n) {
  if (!fits_u64(n)) throw std::overflow_error("natural does not fit in 64 bits");
  return n.convert_to<std::uint64_t>();
}

Nat cantor_pair(const Nat& x, const Nat& y) {
  Nat s = x + y;
  return s * (s + 1) / 2 + y;
}

std::pair<Nat, Nat> cantor_unpair(const Nat& z) {
  // w = floor((sqrt(8z+1) - 1) / 2)
  Nat w = (mp::sqrt(Nat(8 * z + 1)) - 1) / 2;
  Nat t = w * (w + 1) / 2;
  Nat y = z - t;
  return {w - y, y};
}

Nat cantor_triple(const Nat& a, const Nat& b, const Nat& c) { return cantor_pair(a, cantor_pair(b, c)); }

HaltPairCode split_halt_output(const Nat& v) {
  return {static_cast<unsigned>(bit_test(v, 0) ? 1 : 0), v >> 1};
}

Nat make_halt_output(unsigned bit, const Nat& payload) { return (payload << 1) + (bit ? 1 : 0); }

Nat exp_pair(std::uint64_t x, const Nat& y) {
  Nat odd = 2 * y + 1;
  return (odd << x) - 1;
}

std::pair<Nat, Nat> exp_unpair(const Nat& z) {
  Nat w = z + 1;
  std::uint64_t x = mp::lsb(w);
  Nat odd = w >> x;
  return {Nat(x), (odd - 1) / 2};
}

namespace {

std::string mpz_string(const Nat& v, int base) {
  const mpz_srcptr z = v.backend().data();
  std::string s(mpz_sizeinbase(z, base) + 2, '\0');
  mpz_get_str(s.data(), base, z);
  s.resize(std::char_traits<char>::length(s.data()));
  return s;
}

Nat mpz_parse(const std::string& s, int base) {
  Nat v;
  if (s.empty()) return v;
  if (mpz_set_str(v.backend().data(), s.c_str(), base) != 0) throw std::invalid_argument("bad digit string");
  return v;
}

Nat pow3(std::size_t k) { return mp::pow(Nat(3), static_cast<unsigned>(k)); }

// (3^L - 1) / 2: value of the all-'0' bijective ternary string of length L
Nat repunit3(std::size_t len) { return (pow3(len) - 1) / 2; }

}  // namespace

std::string bijective_binary(const Nat& x) {
  std::string s = mpz_string(x + 1, 2);
  return s.substr(1);
}

Nat from_bijective_binary(const std::string& bits) { return mpz_parse("1" + bits, 2) - 1; }

std::string bijective_ternary(const Nat& v) {
  if (v == 0) return {};
  // length L with 3^L <= 2v+1 < 3^{L+1}
  Nat t = 2 * v + 1;
  std::size_t len = mpz_sizeinbase(t.backend().data(), 3);
  while (pow3(len) > t) --len;
  std::string digits = mpz_string(v - repunit3(len), 3);
  std::string out(len - digits.size(), '0');
  out += digits;
  for (char& c : out) c = c == '2' ? '#' : c;
  return out;
}

Nat from_bijective_ternary(const std::string& s) {
  std::string digits = s;
  for (char& c : digits) {
    if (c == '#') c = '2';
    else if (c != '0' && c != '1') throw std::invalid_argument("bad ternary symbol");
  }
  return mpz_parse(digits, 3) + repunit3(s.size());
}

Nat seq_encode(const std::vector<Nat>& xs) {
  if (xs.empty()) return 0;
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s.push_back('#');
    s += bijective_binary(xs[i]);
  }
  return 1 + from_bijective_ternary(s);
}

std::vector<Nat> seq_decode(const Nat& code) {
  std::vector<Nat> out;
  if (code == 0) return out;
  std::string s = bijective_ternary(code - 1);
  std::size_t start = 0;
  for (;;) {
    std::size_t hash = s.find('#', start);
    out.push_back(from_bijective_binary(s.substr(start, hash == std::string::npos ? std::string::npos : hash - start)));
    if (hash == std::string::npos) break;
    start = hash + 1;
  }
  return out;
}

Nat seq_snoc(const Nat& code, const Nat& x) {
  std::string bits = bijective_binary(x);
  Nat tail = from_bijective_ternary(bits);
  if (code == 0) return 1 + tail;
  return 1 + (code - 1) * pow3(bits.size() + 1) + 3 * pow3(bits.size()) + tail;
}

Nat seq_nth(const Nat& code, const Nat& k) {
  if (code == 0 || !fits_u64(k)) return 0;
  std::uint64_t want = k.convert_to<std::uint64_t>();
  std::string s = bijective_ternary(code - 1);
  std::size_t start = 0;
  for (std::uint64_t i = 0;; ++i) {
    std::size_t hash = s.find('#', start);
    if (i == want)
      return from_bijective_binary(s.substr(start, hash == std::string::npos ? std::string::npos : hash - start));
    if (hash == std::string::npos) return 0;
    start = hash + 1;
  }
}

std::size_t seq_length(const Nat& code) {
  if (code == 0) return 0;
  std::string s = bijective_ternary(code - 1);
  return 1 + static_cast<std::size_t>(std::count(s.begin(), s.end(), '#'));
}

}  // namespace subt
