#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/circuit/arith.hpp"
#include "dmpc/circuit/builder.hpp"

// Stand-alone two-operand circuits. Operand `a` belongs to party 0 and `b` to
// party 1; the output group is named after the operation.
namespace dmpc::circuit {

namespace detail {
inline void check_width(const char* what, std::uint32_t n, std::uint32_t lo, std::uint32_t hi) {
  if (n < lo || n > hi)
    throw WidthError(std::string(what) + ": width " + std::to_string(n) + " outside [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
}
}  // namespace detail

inline Circuit build_adder(std::uint32_t n_bits) {
  detail::check_width("adder", n_bits, 1, 64);
  CircuitBuilder cb;
  auto a = cb.input("a", 0, n_bits);
  auto b = cb.input("b", 1, n_bits);
  cb.output("sum", arith::add(cb, a, b, n_bits));
  return cb.build();
}

inline Circuit build_multiplier(std::uint32_t n_bits) {
  detail::check_width("multiplier", n_bits, 1, 32);
  CircuitBuilder cb;
  auto a = cb.input("a", 0, n_bits);
  auto b = cb.input("b", 1, n_bits);
  cb.output("product", arith::mul_unsigned(cb, a, b));
  return cb.build();
}

inline Circuit build_greater_than(std::uint32_t n_bits) {
  detail::check_width("greater_than", n_bits, 1, 128);
  CircuitBuilder cb;
  auto a = cb.input("a", 0, n_bits);
  auto b = cb.input("b", 1, n_bits);
  cb.output("gt", Bits{arith::greater_than(cb, a, b)});
  return cb.build();
}

// Constant-table lookup: the index is party 0's input, table entries are
// constant wires, so the selected value stays hidden from an evaluator.
inline Circuit build_lookup(const std::vector<std::uint64_t>& table, std::uint32_t index_bits, std::uint32_t out_bits) {
  detail::check_width("lookup index", index_bits, 1, 24);
  detail::check_width("lookup output", out_bits, 1, 64);
  if (table.size() != (std::size_t{1} << index_bits))
    throw ConfigError("lookup: table has " + std::to_string(table.size()) + " entries, index width " +
                      std::to_string(index_bits) + " needs " + std::to_string(std::size_t{1} << index_bits));
  BitVector flat;
  flat.reserve(table.size() * out_bits);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (out_bits < 64 && (table[i] >> out_bits) != 0)
      throw WidthError("lookup: entry " + std::to_string(i) + " = " + std::to_string(table[i]) + " does not fit in " +
                       std::to_string(out_bits) + " bits");
    append_bits(flat, table[i], out_bits);
  }
  CircuitBuilder cb;
  auto index = cb.input("index", 0, index_bits);
  auto wires = cb.constant("table", flat);
  std::vector<Bits> entries(table.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    entries[i] = Bits(wires.begin() + static_cast<std::ptrdiff_t>(i * out_bits),
                      wires.begin() + static_cast<std::ptrdiff_t>((i + 1) * out_bits));
  cb.output("value", arith::lookup(cb, index, std::move(entries)));
  return cb.build();
}

}  // namespace dmpc::circuit
