#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dmpc/circuit/circuit.hpp"
#include "dmpc/common/bytes.hpp"
#include "dmpc/common/prg.hpp"
#include "dmpc/common/sha256.hpp"
#include "dmpc/gc/labels.hpp"

// Half-gates garbling with free XOR and point-and-permute. XOR and INV gates
// produce no ciphertexts; each AND gate produces two 128-bit rows.
namespace dmpc::gc {

using circuit::BitVector;
using circuit::Circuit;
using circuit::GateKind;
using circuit::WireId;

// Rows for every AND gate in gate order, bound to the circuit topology.
struct GarbledCircuit {
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::uint16_t kFlagHalfGates = 1;
  static constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 32 + 8;

  Digest circuit_hash{};
  std::vector<Block> rows;  // 2 per AND gate: (T_G, T_E)

  std::uint64_t and_count() const { return rows.size() / 2; }
  std::size_t serialized_size() const { return kHeaderBytes + 16 * rows.size(); }

  Bytes serialize() const {
    ByteWriter w;
    w.reserve(serialized_size());
    w.raw("DMGC", 4);
    w.u16(kVersion);
    w.u16(kFlagHalfGates);
    w.raw(circuit_hash);
    w.u64(and_count());
    for (const auto& r : rows) write_block(w, r);
    return w.take();
  }

  static GarbledCircuit parse(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    auto magic = r.raw(4);
    if (std::string(magic.begin(), magic.end()) != "DMGC") throw ParseError("garbled circuit: bad magic");
    if (r.u16() != kVersion) throw ParseError("garbled circuit: unsupported version");
    if (r.u16() != kFlagHalfGates) throw ParseError("garbled circuit: unsupported flags");
    GarbledCircuit gc;
    auto h = r.raw(32);
    std::copy(h.begin(), h.end(), gc.circuit_hash.begin());
    const auto n_and = r.u64();
    if (n_and > r.remaining() / 32) throw ParseError("garbled circuit: AND count exceeds payload");
    gc.rows.resize(2 * n_and);
    for (auto& row : gc.rows) row = read_block(r);
    r.expect_done("garbled circuit");
    return gc;
  }

  bool operator==(const GarbledCircuit&) const = default;
};

// Point bit of each output wire's zero-label.
struct DecodingInfo {
  BitVector mask;

  Bytes serialize() const {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(mask.size()));
    Bytes packed((mask.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) packed[i / 8] |= static_cast<std::uint8_t>((mask[i] & 1u) << (i % 8));
    w.raw(packed);
    return w.take();
  }
  static DecodingInfo parse(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    DecodingInfo d;
    d.mask.resize(r.u32());
    auto packed = r.raw((d.mask.size() + 7) / 8);
    for (std::size_t i = 0; i < d.mask.size(); ++i) d.mask[i] = (packed[i / 8] >> (i % 8)) & 1u;
    r.expect_done("decoding info");
    return d;
  }
  bool operator==(const DecodingInfo&) const = default;
};

// Zero-label of party input wire `w`.
using LabelSource = std::function<WireLabel(WireId)>;

struct GarbleResult {
  GarbledCircuit garbled;
  DecodingInfo decoding;
  // Active labels of the constant wires, in wire order; sent with the circuit.
  std::vector<WireLabel> constant_labels;
  double garble_ms = 0;
};

namespace detail {

// Tweakable correlation-robust hash H(x, j) = π(K) ⊕ K with K = 2x ⊕ j and π a
// fixed-key AES permutation. Computes `n` hashes at once.
class GateHash {
 public:
  static const GateHash& instance() {
    static const GateHash h;
    return h;
  }
  void operator()(const Block* x, const std::uint64_t* tweak, Block* out, std::size_t n) const {
    Block k[4];
    for (std::size_t i = 0; i < n; ++i) k[i] = x[i].doubled() ^ Block{tweak[i], 0};
    aes_.encrypt_n(k, out, n);
    for (std::size_t i = 0; i < n; ++i) out[i] ^= k[i];
  }

 private:
  GateHash() : aes_(Block{0x0f1e2d3c4b5a6978ULL, 0x8796a5b4c3d2e1f0ULL}) {}
  Aes128 aes_;
};

}  // namespace detail

// Garbles `c`. Party-input zero-labels come from `party_labels`; constant-wire
// zero-labels are drawn from `rng`.
inline GarbleResult garble(const Circuit& c, const GlobalDelta& delta, const LabelSource& party_labels, Prg& rng) {
  const auto t0 = std::chrono::steady_clock::now();
  const Block D = delta.value();
  std::vector<Block> zero(c.n_wires());
  for (WireId w = 0; w < c.n_inputs(); ++w) zero[w] = party_labels(w);

  GarbleResult res;
  const auto consts = c.constant_values();
  res.constant_labels.reserve(consts.size());
  for (std::size_t i = 0; i < consts.size(); ++i) {
    const WireId w = c.n_inputs() + static_cast<WireId>(i);
    zero[w] = rng.next_block();
    res.constant_labels.push_back(zero[w] ^ select(consts[i] != 0, D));
  }

  const auto& hash = detail::GateHash::instance();
  auto& rows = res.garbled.rows;
  rows.reserve(2 * c.stats().non_xor);
  const auto& gates = c.gates();
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const auto& g = gates[gi];
    switch (g.kind) {
      case GateKind::Xor: zero[g.out] = zero[g.a] ^ zero[g.b]; break;
      case GateKind::Inv: zero[g.out] = zero[g.a] ^ D; break;
      case GateKind::And: {
        const Block A0 = zero[g.a], B0 = zero[g.b];
        const bool pa = A0.lsb(), pb = B0.lsb();
        const std::uint64_t j = 2 * static_cast<std::uint64_t>(gi), j2 = j + 1;
        const Block in[4] = {A0, A0 ^ D, B0, B0 ^ D};
        const std::uint64_t tw[4] = {j, j, j2, j2};
        Block h[4];
        hash(in, tw, h, 4);
        const Block TG = h[0] ^ h[1] ^ select(pb, D);
        const Block WG0 = h[0] ^ select(pa, TG);
        const Block TE = h[2] ^ h[3] ^ A0;
        const Block WE0 = h[2] ^ select(pb, TE ^ A0);
        zero[g.out] = WG0 ^ WE0;
        rows.push_back(TG);
        rows.push_back(TE);
        break;
      }
    }
  }

  res.garbled.circuit_hash = c.structure_hash();
  for (const auto& o : c.output_groups())
    for (auto w : o.wires) res.decoding.mask.push_back(zero[w].lsb() ? 1 : 0);
  res.garble_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Evaluates with one active label per input wire (party inputs, then constant
// wires). Touches exactly one hash pair and the two rows of each AND gate.
inline std::vector<WireLabel> evaluate(const GarbledCircuit& gc, const Circuit& c, const std::vector<WireLabel>& active) {
  if (active.size() != c.n_input_wires())
    throw ConfigError("evaluate: expected " + std::to_string(c.n_input_wires()) + " input labels, got " +
                      std::to_string(active.size()));
  if (gc.circuit_hash != c.structure_hash()) throw ProtocolError("evaluate: garbled circuit is bound to a different circuit");
  if (gc.and_count() != c.stats().non_xor) throw ProtocolError("evaluate: row count does not match AND count");

  std::vector<Block> wire(c.n_wires());
  std::copy(active.begin(), active.end(), wire.begin());
  const auto& hash = detail::GateHash::instance();
  std::size_t row = 0;
  const auto& gates = c.gates();
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const auto& g = gates[gi];
    switch (g.kind) {
      case GateKind::Xor: wire[g.out] = wire[g.a] ^ wire[g.b]; break;
      case GateKind::Inv: wire[g.out] = wire[g.a]; break;
      case GateKind::And: {
        const Block A = wire[g.a], B = wire[g.b];
        const std::uint64_t j = 2 * static_cast<std::uint64_t>(gi);
        const Block in[2] = {A, B};
        const std::uint64_t tw[2] = {j, j + 1};
        Block h[2];
        hash(in, tw, h, 2);
        const Block& TG = gc.rows[row];
        const Block& TE = gc.rows[row + 1];
        row += 2;
        wire[g.out] = h[0] ^ select(A.lsb(), TG) ^ h[1] ^ select(B.lsb(), TE ^ A);
        break;
      }
    }
  }
  std::vector<WireLabel> out;
  out.reserve(c.n_outputs());
  for (const auto& o : c.output_groups())
    for (auto w : o.wires) out.push_back(wire[w]);
  return out;
}

inline BitVector decode(const DecodingInfo& info, const std::vector<WireLabel>& labels) {
  if (labels.size() != info.mask.size())
    throw ConfigError("decode: expected " + std::to_string(info.mask.size()) + " labels, got " + std::to_string(labels.size()));
  BitVector bits(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) bits[i] = static_cast<std::uint8_t>(labels[i].lsb() ^ (info.mask[i] & 1u));
  return bits;
}

// Active labels for plaintext party inputs given their zero-labels.
inline std::vector<WireLabel> encode_inputs(const Circuit& c, const LabelSource& party_labels, const GlobalDelta& delta,
                                            const BitVector& bits) {
  if (bits.size() != c.n_inputs()) throw ConfigError("encode_inputs: input length mismatch");
  std::vector<WireLabel> out(c.n_inputs());
  for (WireId w = 0; w < c.n_inputs(); ++w) out[w] = party_labels(w) ^ select(bits[w] != 0, delta.value());
  return out;
}

}  // namespace dmpc::gc
