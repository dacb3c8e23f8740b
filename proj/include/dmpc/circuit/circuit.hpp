#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/common/errors.hpp"
#include "dmpc/common/sha256.hpp"

namespace dmpc::circuit {

// Dense wire index. Party inputs occupy [0, n_inputs), constant wires follow,
// then one wire per gate output in gate order.
using WireId = std::uint32_t;

// One bit per byte, values 0 or 1.
using BitVector = std::vector<std::uint8_t>;

enum class GateKind : std::uint8_t { Xor, And, Inv };

inline const char* to_string(GateKind k) {
  switch (k) {
    case GateKind::Xor: return "XOR";
    case GateKind::And: return "AND";
    case GateKind::Inv: return "INV";
  }
  return "?";
}

struct Gate {
  GateKind kind;
  WireId a;
  WireId b;  // unused for Inv
  WireId out;

  int arity() const { return kind == GateKind::Inv ? 1 : 2; }
  bool operator==(const Gate&) const = default;
};

// Bits supplied at evaluation time by a party (a maker).
struct PartyGroup {
  std::string name;
  std::uint32_t owner = 0;
  std::uint32_t width = 0;
  bool operator==(const PartyGroup&) const = default;
};

// Bits fixed by the circuit author (weights, tables, thresholds). Their values
// travel with the circuit but never through an evaluator-visible structure.
struct ConstantGroup {
  std::string name;
  BitVector values;  // LSB first
  std::uint32_t width() const { return static_cast<std::uint32_t>(values.size()); }
  bool operator==(const ConstantGroup&) const = default;
};

struct OutputGroup {
  std::string name;
  std::vector<WireId> wires;  // LSB first
  bool operator==(const OutputGroup&) const = default;
};

struct GateStats {
  std::uint64_t total = 0;
  std::uint64_t non_xor = 0;  // AND gates; INV and XOR are free
  std::uint64_t xor_gates = 0;
  std::uint64_t inv_gates = 0;
  bool operator==(const GateStats&) const = default;
};

// Immutable, topologically ordered Boolean circuit.
class Circuit {
 public:
  Circuit() { hash_ = compute_hash(); }
  Circuit(std::vector<PartyGroup> parties, std::vector<ConstantGroup> constants, std::vector<Gate> gates,
          std::vector<OutputGroup> outputs)
      : parties_(std::move(parties)), constants_(std::move(constants)), gates_(std::move(gates)), outputs_(std::move(outputs)) {
    for (const auto& p : parties_) n_inputs_ += p.width;
    for (const auto& c : constants_) n_constants_ += c.width();
    validate();
    hash_ = compute_hash();
  }

  std::uint32_t n_inputs() const { return n_inputs_; }
  std::uint32_t n_constants() const { return n_constants_; }
  // Party inputs plus constant wires: every wire that needs a label up front.
  std::uint32_t n_input_wires() const { return n_inputs_ + n_constants_; }
  std::uint32_t n_wires() const { return n_input_wires() + static_cast<std::uint32_t>(gates_.size()); }

  const std::vector<PartyGroup>& party_groups() const { return parties_; }
  const std::vector<ConstantGroup>& constant_groups() const { return constants_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<OutputGroup>& output_groups() const { return outputs_; }

  std::vector<WireId> output_wires() const {
    std::vector<WireId> all;
    for (const auto& g : outputs_) all.insert(all.end(), g.wires.begin(), g.wires.end());
    return all;
  }
  std::size_t n_outputs() const {
    std::size_t n = 0;
    for (const auto& g : outputs_) n += g.wires.size();
    return n;
  }

  // Values of the constant wires in wire order.
  BitVector constant_values() const {
    BitVector v;
    v.reserve(n_constants_);
    for (const auto& c : constants_) v.insert(v.end(), c.values.begin(), c.values.end());
    return v;
  }

  // First wire of the party group at `index`.
  WireId party_offset(std::size_t index) const {
    WireId off = 0;
    for (std::size_t i = 0; i < index; ++i) off += parties_.at(i).width;
    return off;
  }

  GateStats stats() const {
    GateStats s;
    s.total = gates_.size();
    for (const auto& g : gates_) {
      if (g.kind == GateKind::And) ++s.non_xor;
      else if (g.kind == GateKind::Xor) ++s.xor_gates;
      else ++s.inv_gates;
    }
    return s;
  }

  // Same circuit with constant values replaced by zeros; what an evaluator
  // may know about the circuit.
  Circuit topology_only() const {
    auto consts = constants_;
    for (auto& c : consts) std::fill(c.values.begin(), c.values.end(), std::uint8_t{0});
    return Circuit(parties_, std::move(consts), gates_, outputs_);
  }

  // SHA-256 over a canonical binary encoding of everything except constant
  // values: the topology an evaluator may know. Computed once at construction.
  const Digest& structure_hash() const { return hash_; }

  bool operator==(const Circuit&) const = default;

 private:
  Digest compute_hash() const {
    std::vector<std::uint8_t> buf;
    auto u32 = [&buf](std::uint32_t v) {
      for (int i = 3; i >= 0; --i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    auto name = [&](const std::string& s) {
      u32(static_cast<std::uint32_t>(s.size()));
      buf.insert(buf.end(), s.begin(), s.end());
    };
    buf.insert(buf.end(), {'D', 'M', 'C', '1'});
    u32(static_cast<std::uint32_t>(parties_.size()));
    for (const auto& p : parties_) {
      name(p.name);
      u32(p.owner);
      u32(p.width);
    }
    u32(static_cast<std::uint32_t>(constants_.size()));
    for (const auto& c : constants_) {
      name(c.name);
      u32(c.width());
    }
    u32(static_cast<std::uint32_t>(outputs_.size()));
    for (const auto& o : outputs_) {
      name(o.name);
      u32(static_cast<std::uint32_t>(o.wires.size()));
      for (auto w : o.wires) u32(w);
    }
    u32(static_cast<std::uint32_t>(gates_.size()));
    Sha256 h;
    h.update(buf);
    buf.clear();
    for (const auto& g : gates_) {
      buf.push_back(static_cast<std::uint8_t>(g.kind));
      u32(g.a);
      u32(g.b);
      u32(g.out);
      if (buf.size() >= (1u << 16)) {
        h.update(buf);
        buf.clear();
      }
    }
    h.update(buf);
    return h.finish();
  }

  void validate() const {
    const WireId first_gate_wire = n_input_wires();
    for (std::size_t i = 0; i < gates_.size(); ++i) {
      const Gate& g = gates_[i];
      const WireId expect_out = first_gate_wire + static_cast<WireId>(i);
      if (g.out != expect_out) throw ConfigError("gate " + std::to_string(i) + ": output wire is not dense/topological");
      if (g.a >= g.out || (g.arity() == 2 && g.b >= g.out))
        throw ConfigError("gate " + std::to_string(i) + ": input does not precede output");
    }
    const WireId limit = n_wires();
    for (const auto& o : outputs_)
      for (auto w : o.wires)
        if (w >= limit) throw ConfigError("output '" + o.name + "' references unknown wire");
    for (const auto& c : constants_)
      for (auto v : c.values)
        if (v > 1) throw ConfigError("constant '" + c.name + "' has a non-bit value");
  }

  std::vector<PartyGroup> parties_;
  std::vector<ConstantGroup> constants_;
  std::vector<Gate> gates_;
  std::vector<OutputGroup> outputs_;
  std::uint32_t n_inputs_ = 0;
  std::uint32_t n_constants_ = 0;
  Digest hash_{};
};

inline GateStats gate_stats(const Circuit& c) { return c.stats(); }
inline const Digest& structure_hash(const Circuit& c) { return c.structure_hash(); }

// Little-endian bit decomposition helpers.
inline BitVector to_bits(std::uint64_t value, std::uint32_t width) {
  BitVector bits(width);
  for (std::uint32_t i = 0; i < width; ++i) bits[i] = i < 64 ? static_cast<std::uint8_t>((value >> i) & 1u) : 0;
  return bits;
}

inline std::uint64_t from_bits(const BitVector& bits, std::size_t offset = 0, std::size_t width = 64) {
  std::uint64_t v = 0;
  const std::size_t n = std::min<std::size_t>(width, 64);
  for (std::size_t i = 0; i < n && offset + i < bits.size(); ++i) v |= static_cast<std::uint64_t>(bits[offset + i] & 1u) << i;
  return v;
}

inline void append_bits(BitVector& out, std::uint64_t value, std::uint32_t width) {
  for (std::uint32_t i = 0; i < width; ++i) out.push_back(i < 64 ? static_cast<std::uint8_t>((value >> i) & 1u) : 0);
}

}  // namespace dmpc::circuit
