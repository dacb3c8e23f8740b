#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "dmpc/common/bytes.hpp"

namespace dmpc {

// 128-bit value; `lo` holds bits 0..63 so `lsb()` is bit 0 of `lo`.
struct Block {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  constexpr bool lsb() const { return (lo & 1u) != 0; }
  constexpr Block operator^(const Block& o) const { return {lo ^ o.lo, hi ^ o.hi}; }
  constexpr Block& operator^=(const Block& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  constexpr bool operator==(const Block&) const = default;

  // Doubling in GF(2^128) with the x^128 + x^7 + x^2 + x + 1 reduction.
  constexpr Block doubled() const {
    const std::uint64_t carry = hi >> 63;
    Block r{lo << 1, (hi << 1) | (lo >> 63)};
    r.lo ^= carry * 0x87u;
    return r;
  }

  // Native memory image (little-endian words): the byte order AES sees.
  std::array<std::uint8_t, 16> le_bytes() const {
    std::array<std::uint8_t, 16> out{};
    for (int i = 0; i < 8; ++i) {
      out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(lo >> (8 * i));
      out[static_cast<std::size_t>(8 + i)] = static_cast<std::uint8_t>(hi >> (8 * i));
    }
    return out;
  }
  static Block from_le_bytes(std::span<const std::uint8_t, 16> b) {
    Block r;
    for (int i = 7; i >= 0; --i) {
      r.lo = (r.lo << 8) | b[static_cast<std::size_t>(i)];
      r.hi = (r.hi << 8) | b[static_cast<std::size_t>(8 + i)];
    }
    return r;
  }
};

inline constexpr Block kZeroBlock{};

inline constexpr Block select(bool bit, const Block& b) { return bit ? b : kZeroBlock; }

// Wire encoding is the 128-bit integer in big-endian order.
inline void write_block(ByteWriter& w, const Block& b) {
  w.u64(b.hi);
  w.u64(b.lo);
}
inline Block read_block(ByteReader& r) {
  Block b;
  b.hi = r.u64();
  b.lo = r.u64();
  return b;
}

}  // namespace dmpc
