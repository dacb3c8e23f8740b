#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/common/errors.hpp"

namespace dmpc::he {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 hi64(u128 x) { return static_cast<u64>(x >> 64); }

// Word-sized modulus (< 2^62) with a precomputed Barrett constant
// floor(2^128 / q), so 128-bit products reduce without a division.
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(u64 q) : q_(q) {
    if (q < 2 || (q >> 62) != 0) throw ConfigError("modulus must lie in [2, 2^62): " + std::to_string(q));
    // floor((2^128 - 1) / q) equals floor(2^128 / q) unless q is a power of two.
    const u128 all = ~static_cast<u128>(0);
    u128 r = all / q;
    if (all % q == q - 1) ++r;
    r0_ = static_cast<u64>(r);
    r1_ = hi64(r);
  }

  u64 value() const { return q_; }

  u64 reduce128(u128 z) const {
    const u64 z0 = static_cast<u64>(z), z1 = hi64(z);
    const u128 a = static_cast<u128>(z0) * r0_;
    const u128 b = static_cast<u128>(z0) * r1_;
    const u128 c = static_cast<u128>(z1) * r0_;
    const u128 mid = static_cast<u128>(hi64(a)) + static_cast<u64>(b) + static_cast<u64>(c);
    const u64 qhat = z1 * r1_ + hi64(b) + hi64(c) + hi64(mid);
    u64 r = z0 - qhat * q_;
    while (r >= q_) r -= q_;
    return r;
  }
  u64 reduce(u64 x) const { return x >= q_ ? x % q_ : x; }

  u64 add(u64 a, u64 b) const {
    const u64 s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + q_ - b; }
  u64 neg(u64 a) const { return a == 0 ? 0 : q_ - a; }
  u64 mul(u64 a, u64 b) const { return reduce128(static_cast<u128>(a) * b); }

  u64 pow(u64 base, u64 e) const {
    u64 r = 1 % q_;
    base = reduce(base);
    while (e) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  // Inverse for prime q.
  u64 inv(u64 a) const {
    if (reduce(a) == 0) throw ConfigError("zero has no inverse modulo " + std::to_string(q_));
    return pow(a, q_ - 2);
  }

  // Signed integer to its residue.
  u64 from_signed(std::int64_t v) const {
    if (v >= 0) return reduce(static_cast<u64>(v));
    const u64 m = static_cast<u64>(-(v + 1)) % q_;  // avoids overflow at INT64_MIN
    return q_ - 1 - m;
  }

  bool operator==(const Modulus& o) const { return q_ == o.q_; }

 private:
  u64 q_ = 0;
  u64 r0_ = 0, r1_ = 0;
};

// Precomputed operand for repeated multiplication by a fixed w (Shoup):
// w' = floor(w * 2^64 / q).
struct ShoupOperand {
  u64 w = 0;
  u64 w_shoup = 0;
  ShoupOperand() = default;
  ShoupOperand(u64 w_, u64 q) : w(w_), w_shoup(static_cast<u64>((static_cast<u128>(w_) << 64) / q)) {}
};

inline u64 mul_shoup(u64 x, const ShoupOperand& w, u64 q) {
  const u64 qhat = hi64(static_cast<u128>(x) * w.w_shoup);
  u64 r = x * w.w - qhat * q;
  return r >= q ? r - q : r;
}

// Deterministic Miller-Rabin for 64-bit integers.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  auto mulmod = [n](u64 a, u64 b) { return static_cast<u64>(static_cast<u128>(a) * b % n); };
  auto powmod = [&](u64 a, u64 e) {
    u64 r = 1;
    while (e) {
      if (e & 1) r = mulmod(r, a);
      a = mulmod(a, a);
      e >>= 1;
    }
    return r;
  };
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a, d);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// The `count` largest primes p < 2^bits with p = 1 (mod step), descending.
inline std::vector<u64> find_primes(unsigned bits, u64 step, std::size_t count, const std::vector<u64>& exclude = {}) {
  if (bits < 2 || bits > 62) throw ConfigError("prime size must be in [2, 62] bits");
  std::vector<u64> out;
  u64 p = ((1ULL << bits) - 1) / step * step + 1;
  if (p >= (1ULL << bits)) p -= step;
  for (; p > step && out.size() < count; p -= step) {
    bool skip = false;
    for (u64 e : exclude) skip |= (e == p);
    if (!skip && is_prime(p)) out.push_back(p);
  }
  if (out.size() < count) throw ConfigError("not enough NTT-friendly primes of " + std::to_string(bits) + " bits");
  return out;
}

// Primitive 2n-th root of unity modulo prime q (requires q = 1 mod 2n);
// the smallest candidate generator wins, so the choice is deterministic.
inline u64 primitive_root_2n(const Modulus& q, u64 two_n) {
  if ((q.value() - 1) % two_n != 0) throw ConfigError("modulus " + std::to_string(q.value()) + " is not 1 mod " + std::to_string(two_n));
  const u64 e = (q.value() - 1) / two_n;
  for (u64 x = 2; x < q.value(); ++x) {
    const u64 psi = q.pow(x, e);
    if (q.pow(psi, two_n / 2) == q.value() - 1) return psi;
  }
  throw ConfigError("no primitive root found");
}

}  // namespace dmpc::he
