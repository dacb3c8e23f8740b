#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>

#include "dmpc/common/aes.hpp"
#include "dmpc/common/block.hpp"

namespace dmpc {

// AES-128 in counter mode. Deterministic for a fixed seed; `Prg::from_entropy`
// draws the seed from the OS.
class Prg {
 public:
  explicit Prg(const Block& seed) : aes_(std::make_unique<Aes128>(seed)) {}
  // Seed from an integer plus a domain tag, e.g. one stream per protocol role.
  explicit Prg(std::uint64_t seed, std::uint64_t domain = 0) : Prg(Block{seed, domain ^ 0x5052474450524744ULL}) {}

  static Prg from_entropy() {
    std::random_device rd;
    Block seed;
    seed.lo = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    seed.hi = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    return Prg(seed);
  }

  Block next_block() {
    if (pos_ == kBuffer) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    if (spare_valid_) {
      spare_valid_ = false;
      return spare_;
    }
    Block b = next_block();
    spare_ = b.hi;
    spare_valid_ = true;
    return b.lo;
  }

  bool next_bit() { return (next_u64() & 1u) != 0; }

  // Uniform in [0, bound) by rejection sampling.
  std::uint64_t uniform(std::uint64_t bound) {
    if (bound == 0) return next_u64();
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  // Uniform in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform(span));
  }

  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  void fill(std::span<std::uint8_t> out) {
    for (std::size_t i = 0; i < out.size(); i += 16) {
      auto b = next_block().le_bytes();
      for (std::size_t j = 0; j < 16 && i + j < out.size(); ++j) out[i + j] = b[j];
    }
  }

  // Fresh, independent child stream.
  Prg fork() { return Prg(next_block()); }

 private:
  static constexpr std::size_t kBuffer = 64;

  void refill() {
    Block ctr[kBuffer];
    for (std::size_t i = 0; i < kBuffer; ++i) ctr[i] = Block{counter_++, 0};
    aes_->encrypt_n(ctr, buf_, kBuffer);
    pos_ = 0;
  }

  std::unique_ptr<Aes128> aes_;
  Block buf_[kBuffer];
  std::size_t pos_ = kBuffer;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool spare_valid_ = false;
};

}  // namespace dmpc
