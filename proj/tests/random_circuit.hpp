#pragma once

#include <random>

#include "dmpc/circuit/builder.hpp"

// Random circuits with party inputs, constant wires and all gate kinds.
inline dmpc::circuit::Circuit random_circuit(std::mt19937_64& rng, std::uint32_t n_in, std::uint32_t n_const,
                                             std::uint32_t n_gates, std::uint32_t n_out) {
  using namespace dmpc::circuit;
  CircuitBuilder cb;
  Bits pool = cb.input("x", 0, n_in / 2 + 1);
  auto y = cb.input("y", 1, n_in - n_in / 2);
  pool.insert(pool.end(), y.begin(), y.end());
  if (n_const) {
    BitVector vals(n_const);
    for (auto& v : vals) v = static_cast<std::uint8_t>(rng() & 1);
    auto k = cb.constant("k", vals);
    pool.insert(pool.end(), k.begin(), k.end());
  }
  for (std::uint32_t i = 0; i < n_gates; ++i) {
    const Bit a = pool[rng() % pool.size()];
    const Bit b = pool[rng() % pool.size()];
    switch (rng() % 4) {
      case 0: pool.push_back(cb.XOR(a, b)); break;
      case 1: pool.push_back(cb.NOT(a)); break;
      default: pool.push_back(cb.AND(a, b)); break;
    }
  }
  Bits out;
  for (std::uint32_t i = 0; i < n_out; ++i) out.push_back(pool[pool.size() - 1 - (rng() % std::min<std::size_t>(pool.size(), 3 * n_out))]);
  cb.output("out", out);
  return cb.build();
}
