#pragma once

#include <cstdint>
#include <vector>

#include "dmpc/he/bfv.hpp"

namespace dmpc::he {

// Constant-coefficient encoding of one integer mod t.
inline HePlaintext encode_scalar(const BfvContext& ctx, std::int64_t value) {
  HePlaintext m;
  m.t = ctx.t();
  m.encoding = Encoding::Scalar;
  m.coeffs.assign(ctx.n(), 0);
  m.coeffs[0] = ctx.t_mod().from_signed(value);
  return m;
}

inline u64 decode_scalar(const HePlaintext& m) {
  if (m.encoding != Encoding::Scalar) throw ConfigError("decode_scalar: plaintext is batched");
  return m.coeffs.at(0);
}

// Balanced representative in (-t/2, t/2].
inline std::int64_t decode_scalar_signed(const HePlaintext& m) {
  const u64 v = decode_scalar(m);
  return v > m.t / 2 ? static_cast<std::int64_t>(v) - static_cast<std::int64_t>(m.t) : static_cast<std::int64_t>(v);
}

// Slot packing: slot i is the evaluation of the plaintext polynomial at the
// i-th odd power of a 2n-th root of unity mod t, so ring products act
// slot-wise. Requires prime t = 1 mod 2n.
class BatchEncoder {
 public:
  explicit BatchEncoder(const BfvContext& ctx) : ctx_(ctx) {
    if (!ctx.batch_ntt()) throw ConfigError("batching needs a prime plaintext modulus t = 1 mod 2n (t=" +
                                            std::to_string(ctx.t()) + ", n=" + std::to_string(ctx.n()) + ")");
  }

  std::size_t slots() const { return ctx_.n(); }

  HePlaintext encode(const std::vector<std::int64_t>& values) const {
    if (values.size() > slots()) throw ConfigError("batch_encode: more values than slots");
    HePlaintext m;
    m.t = ctx_.t();
    m.encoding = Encoding::Batched;
    m.coeffs.assign(slots(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) m.coeffs[i] = ctx_.t_mod().from_signed(values[i]);
    ctx_.batch_ntt()->inverse(m.coeffs.data());
    return m;
  }

  std::vector<u64> decode(const HePlaintext& m) const {
    if (m.encoding != Encoding::Batched) throw ConfigError("batch_decode: plaintext is not batched");
    std::vector<u64> v = m.coeffs;
    ctx_.batch_ntt()->forward(v.data());
    return v;
  }

 private:
  const BfvContext& ctx_;
};

}  // namespace dmpc::he
