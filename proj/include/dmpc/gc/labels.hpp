#pragma once

#include <cstdint>

#include "dmpc/common/aes.hpp"
#include "dmpc/common/block.hpp"
#include "dmpc/common/errors.hpp"

namespace dmpc::gc {

// 128-bit wire label; bit 0 is the point-and-permute bit.
using WireLabel = Block;

// Free-XOR offset. lsb is always 1, so the two labels of a wire carry
// different point bits.
class GlobalDelta {
 public:
  GlobalDelta() = default;
  explicit GlobalDelta(const Block& b) : value_(b) {
    if (!b.lsb()) throw ConfigError("global delta must have lsb 1");
  }
  const Block& value() const { return value_; }
  operator const Block&() const { return value_; }
  bool operator==(const GlobalDelta&) const = default;

 private:
  Block value_{1, 0};
};

// Δ = AES_seed(tag) with the lsb forced to 1, i.e. δ||1 for a 127-bit δ.
inline GlobalDelta derive_delta(const Block& seed) {
  Block d = Aes128(seed).encrypt(Block{0x41544c4544ULL, 0x31});
  d.lo |= 1u;
  return GlobalDelta(d);
}

// Zero-label PRF for maker input wires: AES_k(wire || maker). Makers and the
// CSP evaluate it independently, which is what removes oblivious transfer.
class InputLabelPrf {
 public:
  explicit InputLabelPrf(const Block& key) : aes_(key) {}
  WireLabel zero_label(std::uint64_t wire_index, std::uint64_t maker = 0) const {
    return aes_.encrypt(Block{wire_index, maker});
  }
  WireLabel label(std::uint64_t wire_index, bool bit, const GlobalDelta& delta, std::uint64_t maker = 0) const {
    return zero_label(wire_index, maker) ^ select(bit, delta.value());
  }

 private:
  Aes128 aes_;
};

inline WireLabel derive_input_label(const Block& prf_key, std::uint64_t wire_index, std::uint64_t maker = 0) {
  return InputLabelPrf(prf_key).zero_label(wire_index, maker);
}

}  // namespace dmpc::gc
