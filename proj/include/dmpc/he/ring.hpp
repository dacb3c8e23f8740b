#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "dmpc/he/modarith.hpp"
#include "dmpc/he/ntt.hpp"
#include "dmpc/he/params.hpp"

namespace dmpc::he {

// Mixed-radix (Garner) digits for an RNS basis m_0..m_{K-1}:
// x = v_0 + v_1 m_0 + v_2 m_0 m_1 + ..., each v_i < m_i.
class Garner {
 public:
  Garner() = default;
  explicit Garner(std::vector<Modulus> m) : m_(std::move(m)) {
    const std::size_t k = m_.size();
    pp_.assign(k, std::vector<u64>(k, 0));
    inv_pp_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      u64 acc = 1 % m_[j].value();
      for (std::size_t i = 0; i < j; ++i) {
        pp_[j][i] = acc;
        acc = m_[j].mul(acc, m_[j].reduce(m_[i].value()));
      }
      inv_pp_[j] = j == 0 ? 1 : m_[j].inv(acc);
    }
    // Digits of floor(M / 2) = (M - 1) / 2, from its residues -(2^-1).
    std::vector<u64> half(k);
    for (std::size_t i = 0; i < k; ++i) half[i] = m_[i].neg(m_[i].inv(2));
    half_digits_.resize(k);
    digits(half.data(), 1, half_digits_.data());
  }

  std::size_t size() const { return m_.size(); }
  const std::vector<Modulus>& moduli() const { return m_; }

  // `x` holds residue i at x[i * stride].
  void digits(const u64* x, std::size_t stride, u64* v) const {
    for (std::size_t j = 0; j < m_.size(); ++j) {
      const Modulus& mj = m_[j];
      u64 s = mj.reduce(x[j * stride]);
      for (std::size_t i = 0; i < j; ++i) s = mj.sub(s, mj.mul(mj.reduce(v[i]), pp_[j][i]));
      v[j] = mj.mul(s, inv_pp_[j]);
    }
  }

  // True when the digits encode a value above floor(M/2): the centered
  // representative is negative.
  bool is_negative(const u64* v) const {
    for (std::size_t i = m_.size(); i-- > 0;) {
      if (v[i] != half_digits_[i]) return v[i] > half_digits_[i];
    }
    return false;
  }

  // Approximate magnitude of the value with digits v.
  long double magnitude(const u64* v) const {
    long double x = 0;
    for (std::size_t i = m_.size(); i-- > 0;) x = x * static_cast<long double>(m_[i].value()) + static_cast<long double>(v[i]);
    return x;
  }

  // Value with digits v (first `count` digits) reduced modulo `r`.
  u64 reduce_digits(const u64* v, std::size_t count, const Modulus& r) const {
    u64 acc = 0;
    for (std::size_t i = count; i-- > 0;) acc = r.add(r.mul(acc, r.reduce(m_[i].value())), r.reduce(v[i]));
    return acc;
  }

 private:
  std::vector<Modulus> m_;
  std::vector<std::vector<u64>> pp_;  // pp_[j][i] = m_0..m_{i-1} mod m_j
  std::vector<u64> inv_pp_;            // (m_0..m_{j-1})^-1 mod m_j
  std::vector<u64> half_digits_;
};

// round(t * x / M) for x in [0, M) given its Garner digits over M's basis;
// the result lies in [0, t]. The top digit is handled exactly; lower digits
// contribute below 2^-40 each and are summed in extended precision.
class ScaleRound {
 public:
  ScaleRound() = default;
  ScaleRound(const std::vector<Modulus>& m, u64 t) : t_(t), top_(m.back().value()) {
    const std::size_t k = m.size();
    inv_tail_.assign(k, 0);
    long double prod = 1;
    for (std::size_t i = k; i-- > 0;) {
      prod *= static_cast<long double>(m[i].value());
      inv_tail_[i] = static_cast<long double>(t) / prod;
    }
  }

  u64 operator()(const u64* v, std::size_t k) const {
    const u128 top = static_cast<u128>(v[k - 1]) * t_;
    const u64 whole = static_cast<u64>(top / top_);
    long double frac = static_cast<long double>(static_cast<u64>(top % top_)) / static_cast<long double>(top_);
    for (std::size_t i = 0; i + 1 < k; ++i) frac += static_cast<long double>(v[i]) * inv_tail_[i];
    return whole + static_cast<u64>(std::llround(frac));
  }

 private:
  u64 t_ = 0;
  u64 top_ = 1;
  std::vector<long double> inv_tail_;  // t / (m_i ... m_{k-1})
};

// Ring-level data shared by every plaintext modulus: the ciphertext basis Q,
// an auxiliary basis P with P > n Q for exact tensor products, NTT tables for
// both, and the constants for basis extension.
class RingContext {
 public:
  explicit RingContext(const HeParams& p) : params_(p) {
    p.validate();
    n_ = p.n;
    for (u64 qi : p.q) q_.emplace_back(qi);
    // Auxiliary primes: same family, excluding Q's primes, until P > 2 n Q.
    const double need = p.log2_q() + std::log2(static_cast<double>(n_)) + 4;
    double have = 0;
    auto candidates = find_primes(60, 2ULL * kMaxDegree, p.q.size() + 8, p.q);
    for (u64 c : candidates) {
      if (have >= need) break;
      p_.emplace_back(c);
      have += std::log2(static_cast<double>(c));
    }
    for (const auto& m : q_) q_ntt_.emplace_back(m, n_);
    for (const auto& m : p_) p_ntt_.emplace_back(m, n_);
    all_ = q_;
    all_.insert(all_.end(), p_.begin(), p_.end());
    garner_q_ = Garner(q_);
    garner_all_ = Garner(all_);
    // Q-prefix products modulo each P prime, and Q mod p.
    q_prefix_mod_p_.assign(p_.size(), std::vector<u64>(q_.size()));
    q_mod_p_.resize(p_.size());
    for (std::size_t j = 0; j < p_.size(); ++j) {
      u64 acc = 1;
      for (std::size_t i = 0; i < q_.size(); ++i) {
        q_prefix_mod_p_[j][i] = acc;
        acc = p_[j].mul(acc, q_[i].value() % p_[j].value());
      }
      q_mod_p_[j] = acc;
    }
    // P-prefix products modulo each Q prime, and P mod q.
    p_prefix_mod_q_.assign(q_.size(), std::vector<u64>(p_.size()));
    p_mod_q_.resize(q_.size());
    for (std::size_t j = 0; j < q_.size(); ++j) {
      u64 acc = 1;
      for (std::size_t i = 0; i < p_.size(); ++i) {
        p_prefix_mod_q_[j][i] = acc;
        acc = q_[j].mul(acc, p_[i].value() % q_[j].value());
      }
      p_mod_q_[j] = acc;
    }
    // (Q / q_i)^-1 mod q_i and Q / q_i mod q_i.
    for (std::size_t i = 0; i < q_.size(); ++i) {
      u64 qhat = 1;
      for (std::size_t l = 0; l < q_.size(); ++l)
        if (l != i) qhat = q_[i].mul(qhat, q_[l].value() % q_[i].value());
      qhat_mod_qi_.push_back(qhat);
      qhat_inv_.emplace_back(q_[i].inv(qhat), q_[i].value());
    }
  }

  const HeParams& params() const { return params_; }
  std::size_t n() const { return n_; }
  std::size_t k() const { return q_.size(); }
  const std::vector<Modulus>& q() const { return q_; }
  const std::vector<Modulus>& p() const { return p_; }
  const std::vector<Modulus>& all() const { return all_; }
  const NttTables& q_ntt(std::size_t i) const { return q_ntt_[i]; }
  const NttTables& all_ntt(std::size_t i) const { return i < q_.size() ? q_ntt_[i] : p_ntt_[i - q_.size()]; }
  const Garner& garner_q() const { return garner_q_; }
  const Garner& garner_all() const { return garner_all_; }
  double log2_q() const { return params_.log2_q(); }
  std::uint64_t ring_hash() const { return params_.ring_hash(); }

  const std::vector<u64>& q_prefix_mod_p(std::size_t j) const { return q_prefix_mod_p_[j]; }
  u64 q_mod_p(std::size_t j) const { return q_mod_p_[j]; }
  const std::vector<u64>& p_prefix_mod_q(std::size_t j) const { return p_prefix_mod_q_[j]; }
  u64 p_mod_q(std::size_t j) const { return p_mod_q_[j]; }
  u64 qhat_mod_qi(std::size_t i) const { return qhat_mod_qi_[i]; }
  const ShoupOperand& qhat_inv(std::size_t i) const { return qhat_inv_[i]; }

  void ntt_q(std::vector<u64>& poly) const {
    for (std::size_t i = 0; i < k(); ++i) q_ntt_[i].forward(poly.data() + i * n_);
  }
  void intt_q(std::vector<u64>& poly) const {
    for (std::size_t i = 0; i < k(); ++i) q_ntt_[i].inverse(poly.data() + i * n_);
  }

  // Small signed coefficients to RNS residues over Q.
  std::vector<u64> lift_small(const std::vector<std::int64_t>& c) const {
    std::vector<u64> out(k() * n_);
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = q_[i].from_signed(c[j]);
    return out;
  }

  // Pointwise product over Q (NTT domain).
  std::vector<u64> mul_ntt(const std::vector<u64>& a, const std::vector<u64>& b) const {
    std::vector<u64> out(a.size());
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = q_[i].mul(a[i * n_ + j], b[i * n_ + j]);
    return out;
  }
  void add_inplace(std::vector<u64>& a, const std::vector<u64>& b) const {
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t j = 0; j < n_; ++j) a[i * n_ + j] = q_[i].add(a[i * n_ + j], b[i * n_ + j]);
  }
  void sub_inplace(std::vector<u64>& a, const std::vector<u64>& b) const {
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t j = 0; j < n_; ++j) a[i * n_ + j] = q_[i].sub(a[i * n_ + j], b[i * n_ + j]);
  }

  // Centered lift of a Q-basis polynomial (coefficient form) into the
  // combined basis Q ∪ P, in coefficient form.
  std::vector<u64> extend_to_all(const std::vector<u64>& poly) const {
    const std::size_t kq = k(), kp = p_.size();
    std::vector<u64> out((kq + kp) * n_);
    std::copy(poly.begin(), poly.end(), out.begin());
    std::vector<u64> v(kq);
    for (std::size_t j = 0; j < n_; ++j) {
      garner_q_.digits(poly.data() + j, n_, v.data());
      const bool neg = garner_q_.is_negative(v.data());
      for (std::size_t l = 0; l < kp; ++l) {
        const Modulus& r = p_[l];
        u64 acc = 0;
        for (std::size_t i = 0; i < kq; ++i) acc = r.add(acc, r.mul(r.reduce(v[i]), q_prefix_mod_p_[l][i]));
        if (neg) acc = r.sub(acc, q_mod_p_[l]);
        out[(kq + l) * n_ + j] = acc;
      }
    }
    return out;
  }

 private:
  HeParams params_;
  std::size_t n_ = 0;
  std::vector<Modulus> q_, p_, all_;
  std::vector<NttTables> q_ntt_, p_ntt_;
  Garner garner_q_, garner_all_;
  std::vector<std::vector<u64>> q_prefix_mod_p_, p_prefix_mod_q_;
  std::vector<u64> q_mod_p_, p_mod_q_, qhat_mod_qi_;
  std::vector<ShoupOperand> qhat_inv_;
};

}  // namespace dmpc::he
