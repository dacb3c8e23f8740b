#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/circuit/circuit.hpp"

namespace dmpc::circuit {

// Handle to a bit under construction: either a public literal (folded away at
// build time, so constant shifts and zero-extension cost nothing) or a node.
class Bit {
 public:
  Bit() : v_(kLiteral) {}
  static Bit literal(bool value) { return Bit(kLiteral | (value ? 1u : 0u)); }
  static Bit node(std::uint32_t id) { return Bit(id); }

  bool is_literal() const { return (v_ & kLiteral) != 0; }
  bool value() const { return (v_ & 1u) != 0; }  // literal only
  std::uint32_t id() const { return v_; }        // node only

  bool operator==(const Bit&) const = default;

 private:
  static constexpr std::uint32_t kLiteral = 0x80000000u;
  explicit Bit(std::uint32_t v) : v_(v) {}
  std::uint32_t v_;
};

// Little-endian: element 0 is the least-significant bit.
using Bits = std::vector<Bit>;

inline Bits literal_bits(std::uint64_t value, std::size_t width) {
  Bits r(width);
  for (std::size_t i = 0; i < width; ++i) r[i] = Bit::literal(i < 64 && ((value >> i) & 1u));
  return r;
}

// Records gates with literal folding, then emits a dense topological Circuit
// with dead gates removed. Identical call sequences give identical circuits.
class CircuitBuilder {
 public:
  Bits input(const std::string& name, std::uint32_t owner, std::uint32_t width) {
    check_name(name);
    groups_.push_back({GroupKind::Party, name, owner, {}, static_cast<std::uint32_t>(nodes_.size()), width});
    Bits bits(width);
    for (std::uint32_t i = 0; i < width; ++i) bits[i] = new_node(NodeKind::Party, 0, 0);
    return bits;
  }

  // Constant wires: values known to the circuit author, hidden from evaluators.
  Bits constant(const std::string& name, const BitVector& values) {
    check_name(name);
    const auto width = static_cast<std::uint32_t>(values.size());
    groups_.push_back({GroupKind::Constant, name, 0, values, static_cast<std::uint32_t>(nodes_.size()), width});
    Bits bits(width);
    for (std::uint32_t i = 0; i < width; ++i) bits[i] = new_node(NodeKind::Constant, 0, 0);
    return bits;
  }
  Bits constant(const std::string& name, std::uint64_t value, std::uint32_t width) {
    return constant(name, to_bits(value, width));
  }

  Bit XOR(Bit a, Bit b) {
    if (a.is_literal() && b.is_literal()) return Bit::literal(a.value() != b.value());
    if (a.is_literal()) std::swap(a, b);
    if (b.is_literal()) return b.value() ? NOT(a) : a;
    if (a == b) return Bit::literal(false);
    return new_node(NodeKind::Xor, a.id(), b.id());
  }

  Bit AND(Bit a, Bit b) {
    if (a.is_literal() && b.is_literal()) return Bit::literal(a.value() && b.value());
    if (a.is_literal()) std::swap(a, b);
    if (b.is_literal()) return b.value() ? a : Bit::literal(false);
    if (a == b) return a;
    return new_node(NodeKind::And, a.id(), b.id());
  }

  Bit NOT(Bit a) {
    if (a.is_literal()) return Bit::literal(!a.value());
    const Node& n = nodes_[a.id()];
    if (n.kind == NodeKind::Inv) return Bit::node(n.a);
    return new_node(NodeKind::Inv, a.id(), 0);
  }

  Bit OR(Bit a, Bit b) { return XOR(XOR(a, b), AND(a, b)); }

  // sel ? if1 : if0, one AND.
  Bit MUX(Bit sel, Bit if0, Bit if1) { return XOR(if0, AND(sel, XOR(if0, if1))); }

  void output(const std::string& name, const Bits& bits) {
    check_name(name);
    outputs_.push_back({name, bits});
  }

  std::size_t node_count() const { return nodes_.size(); }

  Circuit build() const {
    // Liveness from outputs.
    std::vector<std::uint8_t> live(nodes_.size(), 0);
    bool need_literals = false;
    for (const auto& o : outputs_)
      for (auto b : o.bits) {
        if (b.is_literal()) need_literals = true;
        else live[b.id()] = 1;
      }
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (!live[i]) continue;
      const Node& n = nodes_[i];
      if (n.kind == NodeKind::Xor || n.kind == NodeKind::And) {
        live[n.a] = 1;
        live[n.b] = 1;
      } else if (n.kind == NodeKind::Inv) {
        live[n.a] = 1;
      }
    }

    constexpr std::uint32_t kUnassigned = 0xffffffffu;
    std::vector<WireId> remap(nodes_.size(), kUnassigned);
    std::vector<PartyGroup> parties;
    std::vector<ConstantGroup> constants;
    WireId next = 0;
    for (const auto& g : groups_) {
      if (g.kind != GroupKind::Party) continue;
      parties.push_back({g.name, g.owner, g.width});
      for (std::uint32_t i = 0; i < g.width; ++i) remap[g.first_node + i] = next++;
    }
    for (const auto& g : groups_) {
      if (g.kind != GroupKind::Constant) continue;
      constants.push_back({g.name, g.values});
      for (std::uint32_t i = 0; i < g.width; ++i) remap[g.first_node + i] = next++;
    }
    WireId literal_zero = 0;
    if (need_literals) {
      constants.push_back({"literals", BitVector{0, 1}});
      literal_zero = next;
      next += 2;
    }

    std::vector<Gate> gates;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (!live[i] || n.kind == NodeKind::Party || n.kind == NodeKind::Constant) continue;
      Gate g{};
      g.out = next;
      g.a = remap[n.a];
      switch (n.kind) {
        case NodeKind::Xor: g.kind = GateKind::Xor; g.b = remap[n.b]; break;
        case NodeKind::And: g.kind = GateKind::And; g.b = remap[n.b]; break;
        default: g.kind = GateKind::Inv; g.b = 0; break;
      }
      remap[i] = next++;
      gates.push_back(g);
    }

    std::vector<OutputGroup> outs;
    for (const auto& o : outputs_) {
      OutputGroup og{o.name, {}};
      og.wires.reserve(o.bits.size());
      for (auto b : o.bits) og.wires.push_back(b.is_literal() ? literal_zero + (b.value() ? 1u : 0u) : remap[b.id()]);
      outs.push_back(std::move(og));
    }
    return Circuit(std::move(parties), std::move(constants), std::move(gates), std::move(outs));
  }

 private:
  enum class NodeKind : std::uint8_t { Party, Constant, Xor, And, Inv };
  enum class GroupKind : std::uint8_t { Party, Constant };

  struct Node {
    NodeKind kind;
    std::uint32_t a;
    std::uint32_t b;
  };
  struct Group {
    GroupKind kind;
    std::string name;
    std::uint32_t owner;
    BitVector values;
    std::uint32_t first_node;
    std::uint32_t width;
  };
  struct PendingOutput {
    std::string name;
    Bits bits;
  };

  Bit new_node(NodeKind k, std::uint32_t a, std::uint32_t b) {
    if (nodes_.size() >= 0x7fffffffu) throw WidthError("circuit exceeds 2^31 nodes");
    nodes_.push_back({k, a, b});
    return Bit::node(static_cast<std::uint32_t>(nodes_.size() - 1));
  }

  static void check_name(const std::string& name) {
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos)
      throw ConfigError("group name must be non-empty without whitespace: '" + name + "'");
  }

  std::vector<Node> nodes_;
  std::vector<Group> groups_;
  std::vector<PendingOutput> outputs_;
};

}  // namespace dmpc::circuit
