#pragma once

#include <string>

#include "dmpc/circuit/circuit.hpp"

namespace dmpc::circuit {

// Gate-by-gate plaintext evaluation; the reference every garbled run is
// checked against. `inputs` holds the party input bits only; constant wires
// take their values from the circuit.
inline BitVector eval_plain(const Circuit& c, const BitVector& inputs) {
  if (inputs.size() != c.n_inputs())
    throw ConfigError("eval_plain: expected " + std::to_string(c.n_inputs()) + " input bits, got " +
                      std::to_string(inputs.size()));
  BitVector wires(c.n_wires());
  std::copy(inputs.begin(), inputs.end(), wires.begin());
  std::size_t w = c.n_inputs();
  for (const auto& g : c.constant_groups())
    for (auto v : g.values) wires[w++] = v;
  for (const auto& g : c.gates()) {
    switch (g.kind) {
      case GateKind::Xor: wires[g.out] = wires[g.a] ^ wires[g.b]; break;
      case GateKind::And: wires[g.out] = wires[g.a] & wires[g.b]; break;
      case GateKind::Inv: wires[g.out] = wires[g.a] ^ 1u; break;
    }
  }
  BitVector out;
  out.reserve(c.n_outputs());
  for (const auto& o : c.output_groups())
    for (auto id : o.wires) out.push_back(wires[id] & 1u);
  return out;
}

}  // namespace dmpc::circuit
