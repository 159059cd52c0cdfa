#pragma once

// Deliberately plain interpreter for cross-checking the executor. It decodes
// indices from the documented numbering, keeps registers in a map, re-runs
// every round from scratch and has no cycle detection: a divergent run just
// burns its fuel. Shares nothing with src/ but the Nat type.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subt/nat.hpp"

namespace naive {

using subt::Nat;

// digits 1..3, most significant first
inline std::vector<int> bijective3(Nat v) {
  std::vector<int> d;
  while (v > 0) {
    int r = static_cast<int>(v % 3);
    if (r == 0) r = 3;
    d.insert(d.begin(), r);
    v = (v - r) / 3;
  }
  return d;
}

inline Nat unbijective3(const std::vector<int>& d) {
  Nat v = 0;
  for (int x : d) v = v * 3 + x;
  return v;
}

// bijective binary spelling of x as digits 1 ('0') and 2 ('1')
inline std::vector<int> spell(const Nat& x) {
  std::vector<int> bits;
  Nat w = x + 1;
  while (w > 1) {
    bits.insert(bits.begin(), static_cast<int>(w % 2) + 1);
    w /= 2;
  }
  return bits;
}

inline Nat unspell(const std::vector<int>& bits) {
  Nat w = 1;
  for (int b : bits) w = w * 2 + (b - 1);
  return w - 1;
}

inline std::vector<Nat> list_decode(const Nat& code) {
  std::vector<Nat> out;
  if (code == 0) return out;
  std::vector<int> cur;
  for (int d : bijective3(code - 1)) {
    if (d == 3) {
      out.push_back(unspell(cur));
      cur.clear();
    } else {
      cur.push_back(d);
    }
  }
  out.push_back(unspell(cur));
  return out;
}

inline Nat list_encode(const std::vector<Nat>& xs) {
  if (xs.empty()) return 0;
  std::vector<int> d;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) d.push_back(3);
    auto s = spell(xs[i]);
    d.insert(d.end(), s.begin(), s.end());
  }
  return 1 + unbijective3(d);
}

inline Nat pair(const Nat& x, const Nat& y) { return (x + y) * (x + y + 1) / 2 + y; }

inline std::pair<Nat, Nat> unpair(const Nat& z) {
  // largest w with w(w+1)/2 <= z, by bisection
  Nat lo = 0, hi = 1;
  while (hi * (hi + 1) / 2 <= z) hi *= 2;
  while (hi - lo > 1) {
    Nat mid = (lo + hi) / 2;
    if (mid * (mid + 1) / 2 <= z) lo = mid;
    else hi = mid;
  }
  Nat y = z - lo * (lo + 1) / 2;
  return {lo - y, y};
}

enum Op { NOP, INC, DECJ, JMP, HALT, SET, ADD, PAIR, UNPAIR, JEQ, HALVE, NTH, SNOC, SIM };

struct Ins {
  Op op = NOP;
  std::vector<Nat> a;
};

inline Ins decode_ins(const Nat& code) {
  static const Op coded[13] = {INC, DECJ, JMP, HALT, SET, ADD, PAIR, UNPAIR, JEQ, HALVE, NTH, SNOC, SIM};
  static const int operands[14] = {0, 1, 2, 1, 1, 2, 3, 3, 3, 3, 3, 3, 3, 4};
  Ins ins;
  if (code == 0) return ins;
  ins.op = coded[static_cast<int>((code - 1) % 13)];
  Nat rest = (code - 1) / 13;
  for (int i = 0; i + 1 < operands[ins.op]; ++i) {
    // rest + 1 = 2^x (2y + 1)
    Nat w = rest + 1;
    Nat x = 0;
    while (w % 2 == 0) {
      w /= 2;
      ++x;
    }
    ins.a.push_back(x);
    rest = (w - 1) / 2;
  }
  ins.a.push_back(rest);
  return ins;
}

inline std::vector<Ins> decode_program(const Nat& index) {
  std::vector<Ins> p;
  for (const auto& c : list_decode(index)) p.push_back(decode_ins(c));
  return p;
}

enum class Kind { Halted, Frozen, Exhausted };
enum class Why { Steps, Rounds };

struct Result {
  Kind kind = Kind::Exhausted;
  Nat value = 0;  // output or frozen query
  Why why = Why::Steps;
  std::vector<std::pair<Nat, Nat>> trace;
};

namespace detail {

struct Frame {
  std::vector<Ins> code;
  std::map<Nat, Nat> r;
  Nat pc = 0;
  Nat ret = 0;
};

inline bool oversized(const Nat& v) { return v != 0 && boost::multiprecision::msb(v) >= (1u << 16); }

// raw halt output, or nothing when stuck or out of fuel
inline std::optional<Nat> apply(const std::vector<Ins>& prog, const Nat& n, const std::vector<Nat>& answers,
                                std::uint64_t& fuel) {
  std::vector<Frame> stack(1);
  stack[0].code = prog;
  stack[0].r[0] = n;
  stack[0].r[1] = answers.size();
  stack[0].r[2] = list_encode(answers);
  for (;;) {
    Frame& f = stack.back();
    if (f.pc >= f.code.size()) return std::nullopt;  // fell off the end
    if (fuel == 0) return std::nullopt;
    --fuel;
    const Ins& i = f.code[static_cast<std::size_t>(f.pc)];
    auto& r = f.r;
    Nat next = f.pc + 1;
    switch (i.op) {
      case NOP: break;
      case INC: r[i.a[0]] += 1; break;
      case DECJ:
        if (r[i.a[0]] == 0) next = i.a[1];
        else r[i.a[0]] -= 1;
        break;
      case JMP: next = i.a[0]; break;
      case HALT: {
        Nat v = r[i.a[0]];
        if (stack.size() == 1) return v;
        Nat slot = f.ret;
        stack.pop_back();
        stack.back().r[slot] = v;
        stack.back().pc += 1;
        continue;
      }
      case SET: r[i.a[0]] = i.a[1]; break;
      case ADD:
        r[i.a[0]] = r[i.a[1]] + r[i.a[2]];
        if (oversized(r[i.a[0]])) return std::nullopt;
        break;
      case PAIR:
        r[i.a[0]] = pair(r[i.a[1]], r[i.a[2]]);
        if (oversized(r[i.a[0]])) return std::nullopt;
        break;
      case UNPAIR: {
        auto [x, y] = unpair(r[i.a[2]]);
        r[i.a[0]] = x;
        r[i.a[1]] = y;
        break;
      }
      case JEQ:
        if (r[i.a[0]] == r[i.a[1]]) next = i.a[2];
        break;
      case HALVE: {
        Nat s = r[i.a[2]];
        r[i.a[0]] = s / 2;
        r[i.a[1]] = s % 2;
        break;
      }
      case NTH: {
        auto xs = list_decode(r[i.a[1]]);
        Nat k = r[i.a[2]];
        r[i.a[0]] = k < xs.size() ? xs[static_cast<std::size_t>(k)] : Nat(0);
        break;
      }
      case SNOC: {
        auto xs = list_decode(r[i.a[1]]);
        xs.push_back(r[i.a[2]]);
        r[i.a[0]] = list_encode(xs);
        if (oversized(r[i.a[0]])) return std::nullopt;
        break;
      }
      case SIM: {
        if (stack.size() >= (1u << 16)) return std::nullopt;
        Frame child;
        child.code = decode_program(r[i.a[1]]);
        auto l = list_decode(r[i.a[3]]);
        child.r[0] = r[i.a[2]];
        child.r[1] = l.size();
        child.r[2] = r[i.a[3]];
        child.ret = i.a[0];
        stack.push_back(std::move(child));
        continue;
      }
    }
    stack.back().pc = next;
  }
}

}  // namespace detail

/// The round protocol over a finite table oracle.
inline Result dialogue(const Nat& index, const std::map<Nat, Nat>& oracle, const Nat& n, std::uint64_t fuel,
                       std::uint64_t round_cap) {
  const auto prog = decode_program(index);
  Result res;
  std::vector<Nat> answers;
  for (;;) {
    auto out = detail::apply(prog, n, answers, fuel);
    if (!out) return res;  // Exhausted, steps
    Nat bit = *out % 2, q = *out / 2;
    if (bit == 1) {
      res.kind = Kind::Halted;
      res.value = q;
      return res;
    }
    if (res.trace.size() >= round_cap) {
      res.why = Why::Rounds;
      return res;
    }
    auto it = oracle.find(q);
    if (it == oracle.end()) {
      res.kind = Kind::Frozen;
      res.value = q;
      return res;
    }
    res.trace.emplace_back(q, it->second);
    answers.push_back(it->second);
  }
}

}  // namespace naive
