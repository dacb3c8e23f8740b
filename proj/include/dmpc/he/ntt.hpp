#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "dmpc/he/modarith.hpp"

namespace dmpc::he {

// Negacyclic NTT over Z_q[X]/(X^n + 1): forward maps coefficients to
// evaluations at the odd powers of a primitive 2n-th root psi (bit-reversed
// order), so pointwise products are products mod X^n + 1.
class NttTables {
 public:
  NttTables(const Modulus& q, std::size_t n) : q_(q), n_(n) {
    if (n < 2 || !std::has_single_bit(n)) throw ConfigError("NTT size must be a power of two >= 2");
    const u64 psi = primitive_root_2n(q, 2 * n);
    const u64 psi_inv = q.inv(psi);
    const unsigned logn = static_cast<unsigned>(std::countr_zero(n));
    fwd_.resize(n);
    inv_.resize(n);
    u64 p = 1, pi = 1;
    std::vector<u64> pow(n), pow_inv(n);
    for (std::size_t i = 0; i < n; ++i) {
      pow[i] = p;
      pow_inv[i] = pi;
      p = q.mul(p, psi);
      pi = q.mul(pi, psi_inv);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = bit_reverse(i, logn);
      fwd_[i] = ShoupOperand(pow[r], q.value());
      inv_[i] = ShoupOperand(pow_inv[r], q.value());
    }
    n_inv_ = ShoupOperand(q.inv(n), q.value());
  }

  const Modulus& modulus() const { return q_; }
  std::size_t size() const { return n_; }

  void forward(u64* a) const {
    const u64 q = q_.value();
    std::size_t t = n_;
    for (std::size_t m = 1; m < n_; m <<= 1) {
      t >>= 1;
      for (std::size_t i = 0; i < m; ++i) {
        const ShoupOperand& s = fwd_[m + i];
        u64* x = a + 2 * i * t;
        u64* y = x + t;
        for (std::size_t j = 0; j < t; ++j) {
          const u64 u = x[j];
          const u64 v = mul_shoup(y[j], s, q);
          x[j] = u + v >= q ? u + v - q : u + v;
          y[j] = u >= v ? u - v : u + q - v;
        }
      }
    }
  }

  void inverse(u64* a) const {
    const u64 q = q_.value();
    std::size_t t = 1;
    for (std::size_t m = n_; m > 1; m >>= 1) {
      const std::size_t h = m >> 1;
      for (std::size_t i = 0; i < h; ++i) {
        const ShoupOperand& s = inv_[h + i];
        u64* x = a + 2 * i * t;
        u64* y = x + t;
        for (std::size_t j = 0; j < t; ++j) {
          const u64 u = x[j];
          const u64 v = y[j];
          x[j] = u + v >= q ? u + v - q : u + v;
          y[j] = mul_shoup(u >= v ? u - v : u + q - v, s, q);
        }
      }
      t <<= 1;
    }
    for (std::size_t j = 0; j < n_; ++j) a[j] = mul_shoup(a[j], n_inv_, q);
  }

  static std::size_t bit_reverse(std::size_t x, unsigned bits) {
    std::size_t r = 0;
    for (unsigned i = 0; i < bits; ++i) r |= ((x >> i) & 1u) << (bits - 1 - i);
    return r;
  }

 private:
  Modulus q_;
  std::size_t n_;
  std::vector<ShoupOperand> fwd_, inv_;
  ShoupOperand n_inv_;
};

}  // namespace dmpc::he
