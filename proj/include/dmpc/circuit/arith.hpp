#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/circuit/builder.hpp"
#include "dmpc/circuit/circuit.hpp"

// Word-level circuit arithmetic over little-endian Bits. Ripple-carry with one
// AND per full adder; schoolbook products. All arithmetic wraps modulo the
// stated width unless a function says it widens.
namespace dmpc::circuit::arith {

inline Bits zero_extend(Bits x, std::size_t width) {
  x.resize(std::max(width, x.size()), Bit::literal(false));
  return x;
}

inline Bits sign_extend(Bits x, std::size_t width) {
  const Bit sign = x.empty() ? Bit::literal(false) : x.back();
  x.resize(std::max(width, x.size()), sign);
  return x;
}

inline Bits truncate(Bits x, std::size_t width) {
  x.resize(width, Bit::literal(false));
  return x;
}

inline Bits shift_left(const Bits& x, std::size_t s) {
  Bits r(s, Bit::literal(false));
  r.insert(r.end(), x.begin(), x.end());
  return r;
}

// Arithmetic shift right (floor division by 2^s) keeping the width minus s.
inline Bits shift_right(const Bits& x, std::size_t s) {
  if (s >= x.size()) return Bits{x.empty() ? Bit::literal(false) : x.back()};
  return Bits(x.begin() + static_cast<std::ptrdiff_t>(s), x.end());
}

// Majority carry: c' = c ^ ((a ^ c) & (b ^ c)).
inline Bit carry(CircuitBuilder& cb, Bit a, Bit b, Bit c) { return cb.XOR(c, cb.AND(cb.XOR(a, c), cb.XOR(b, c))); }

// (x + y + carry_in) mod 2^width; both operands zero-extended or truncated.
inline Bits add(CircuitBuilder& cb, const Bits& x, const Bits& y, std::size_t width, Bit carry_in = Bit::literal(false)) {
  Bits r(width);
  Bit c = carry_in;
  for (std::size_t i = 0; i < width; ++i) {
    const Bit a = i < x.size() ? x[i] : Bit::literal(false);
    const Bit b = i < y.size() ? y[i] : Bit::literal(false);
    r[i] = cb.XOR(cb.XOR(a, b), c);
    if (i + 1 < width) c = carry(cb, a, b, c);
  }
  return r;
}

// Unsigned sum widened by one bit.
inline Bits add_unsigned(CircuitBuilder& cb, const Bits& x, const Bits& y) {
  return add(cb, x, y, std::max(x.size(), y.size()) + 1);
}

// Signed sum widened by one bit.
inline Bits add_signed(CircuitBuilder& cb, const Bits& x, const Bits& y) {
  const std::size_t w = std::max(x.size(), y.size()) + 1;
  return add(cb, sign_extend(x, w), sign_extend(y, w), w);
}

// (x - y) mod 2^width.
inline Bits sub(CircuitBuilder& cb, const Bits& x, const Bits& y, std::size_t width) {
  Bits ny(width);
  for (std::size_t i = 0; i < width; ++i) ny[i] = cb.NOT(i < y.size() ? y[i] : Bit::literal(false));
  return add(cb, x, ny, width, Bit::literal(true));
}

// Signed difference of two signed operands, widened by one bit.
inline Bits sub_signed(CircuitBuilder& cb, const Bits& x, const Bits& y) {
  const std::size_t w = std::max(x.size(), y.size()) + 1;
  return sub(cb, sign_extend(x, w), sign_extend(y, w), w);
}

// neg ? -x : x, width preserved.
inline Bits cond_negate(CircuitBuilder& cb, const Bits& x, Bit neg) {
  Bits flipped(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) flipped[i] = cb.XOR(x[i], neg);
  return add(cb, flipped, Bits{}, x.size(), neg);
}

// Magnitude of a signed value as an unsigned number of the same width.
inline Bits abs_value(CircuitBuilder& cb, const Bits& x) { return cond_negate(cb, x, x.back()); }

// sel ? if1 : if0 bitwise; operands zero-extended to the wider one.
inline Bits mux(CircuitBuilder& cb, Bit sel, const Bits& if0, const Bits& if1) {
  const std::size_t w = std::max(if0.size(), if1.size());
  Bits r(w);
  for (std::size_t i = 0; i < w; ++i)
    r[i] = cb.MUX(sel, i < if0.size() ? if0[i] : Bit::literal(false), i < if1.size() ? if1[i] : Bit::literal(false));
  return r;
}

// Full-width unsigned product (|x| + |y| bits), schoolbook rows.
inline Bits mul_unsigned(CircuitBuilder& cb, const Bits& x, const Bits& y) {
  const std::size_t wx = x.size(), wy = y.size();
  if (wx == 0 || wy == 0) return Bits{};
  Bits acc(wx + wy, Bit::literal(false));
  for (std::size_t j = 0; j < wy; ++j) {
    Bits row(wx);
    for (std::size_t i = 0; i < wx; ++i) row[i] = cb.AND(x[i], y[j]);
    if (j == 0) {
      std::copy(row.begin(), row.end(), acc.begin());
      continue;
    }
    // acc[j .. j+wx] += row; carry-out lands in acc[j+wx] which is still zero.
    Bits hi(acc.begin() + static_cast<std::ptrdiff_t>(j), acc.begin() + static_cast<std::ptrdiff_t>(j + wx));
    Bits sum = add(cb, hi, row, wx + 1);
    std::copy(sum.begin(), sum.end(), acc.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return acc;
}

// Full-width two's-complement product (|x| + |y| bits): the unsigned product
// corrected by subtracting y<<|x| when x<0 and x<<|y| when y<0.
inline Bits mul_signed(CircuitBuilder& cb, const Bits& x, const Bits& y) {
  const std::size_t wx = x.size(), wy = y.size();
  Bits p = mul_unsigned(cb, x, y);
  Bits cy(wy), cx(wx);
  for (std::size_t i = 0; i < wy; ++i) cy[i] = cb.AND(y[i], x.back());
  for (std::size_t i = 0; i < wx; ++i) cx[i] = cb.AND(x[i], y.back());
  // Only bits >= wx (resp. >= wy) change; subtract within those ranges.
  Bits top(p.begin() + static_cast<std::ptrdiff_t>(wx), p.end());
  top = sub(cb, top, cy, wy);
  std::copy(top.begin(), top.end(), p.begin() + static_cast<std::ptrdiff_t>(wx));
  Bits top2(p.begin() + static_cast<std::ptrdiff_t>(wy), p.end());
  top2 = sub(cb, top2, cx, wx);
  std::copy(top2.begin(), top2.end(), p.begin() + static_cast<std::ptrdiff_t>(wy));
  return p;
}

// Unsigned x > y; one AND per bit.
inline Bit greater_than(CircuitBuilder& cb, const Bits& x, const Bits& y) {
  const std::size_t w = std::max(x.size(), y.size());
  Bit c = Bit::literal(false);
  for (std::size_t i = 0; i < w; ++i) {
    const Bit a = i < x.size() ? x[i] : Bit::literal(false);
    const Bit b = i < y.size() ? y[i] : Bit::literal(false);
    c = cb.XOR(a, cb.AND(cb.XOR(a, c), cb.XOR(b, c)));
  }
  return c;
}

// OR over all bits.
inline Bit any(CircuitBuilder& cb, const Bits& x) {
  Bit acc = Bit::literal(false);
  for (auto b : x) acc = cb.OR(acc, b);
  return acc;
}

// table[index] through a binary multiplexer tree; index LSB selects first.
// Costs out_bits * (table.size() - 1) ANDs when entries are wires.
inline Bits lookup(CircuitBuilder& cb, const Bits& index, std::vector<Bits> table) {
  if (table.size() != (std::size_t{1} << index.size()))
    throw ConfigError("lookup: table size " + std::to_string(table.size()) + " != 2^" + std::to_string(index.size()));
  for (auto sel : index) {
    std::vector<Bits> next(table.size() / 2);
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = mux(cb, sel, table[2 * j], table[2 * j + 1]);
    table = std::move(next);
  }
  return table.front();
}

}  // namespace dmpc::circuit::arith
