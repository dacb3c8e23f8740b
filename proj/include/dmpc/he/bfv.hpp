#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dmpc/common/prg.hpp"
#include "dmpc/he/ring.hpp"

// Textbook BFV over the RNS ring of RingContext. Ciphertexts are kept in
// coefficient form; NTTs happen inside each operation.
namespace dmpc::he {

enum class Encoding : std::uint8_t { Scalar = 1, Batched = 2 };

struct HePlaintext {
  std::vector<u64> coeffs;  // mod t, length n
  Encoding encoding = Encoding::Scalar;
  u64 t = 0;
  bool operator==(const HePlaintext&) const = default;
};

struct HeCiphertext {
  std::vector<std::vector<u64>> polys;  // 2 or 3 polynomials over Q, coefficient form
  std::uint64_t params_hash = 0;
  Encoding encoding = Encoding::Scalar;
  // Heuristic log2 of |t (c . s) mod Q|: drives the eager budget check.
  double noise_estimate = 0;
  std::uint32_t depth = 0;  // multiplicative depth consumed

  std::size_t size() const { return polys.size(); }
  bool operator==(const HeCiphertext&) const = default;
};

struct SecretKey {
  std::uint64_t ring_hash = 0;
  std::vector<std::int64_t> s;  // ternary
  std::vector<u64> s_ntt;       // over Q
};

struct PublicKey {
  std::uint64_t ring_hash = 0;
  std::vector<u64> p0, p1;  // NTT form over Q: p0 = -(a s + e), p1 = a
};

// Key-switching keys for s^2 -> s: component (i, d) encrypts
// (Q / q_i) * 2^(d * base_bits) * s^2.
struct RelinKey {
  std::uint64_t ring_hash = 0;
  std::uint32_t base_bits = 30;
  std::uint32_t digits_per_prime = 2;
  std::vector<std::vector<u64>> b, a;  // NTT form over Q
};

struct KeySet {
  SecretKey sk;
  PublicKey pk;
  RelinKey rk;
};

enum class BudgetPolicy { Checked, Unchecked };

// Plaintext-modulus-specific context over a shared ring.
class BfvContext {
 public:
  explicit BfvContext(const HeParams& p) : BfvContext(std::make_shared<const RingContext>(p), p.t) {}
  BfvContext(std::shared_ptr<const RingContext> ring, u64 t) : ring_(std::move(ring)), t_mod_(t) {
    params_ = ring_->params().with_t(t);
    const auto& q = ring_->q();
    u64 q_mod_t = 1;
    for (const auto& qi : q) q_mod_t = t_mod_.mul(q_mod_t, qi.value() % t);
    for (const auto& qi : q) delta_.push_back(qi.mul(qi.neg(q_mod_t % qi.value()), qi.inv(t)));
    scale_q_ = ScaleRound(q, t);
    if (params_.supports_batching()) batch_ntt_ = std::make_shared<NttTables>(t_mod_, ring_->n());
  }

  const HeParams& params() const { return params_; }
  const RingContext& ring() const { return *ring_; }
  std::shared_ptr<const RingContext> ring_ptr() const { return ring_; }
  u64 t() const { return t_mod_.value(); }
  const Modulus& t_mod() const { return t_mod_; }
  std::size_t n() const { return ring_->n(); }
  std::uint64_t params_hash() const { return params_.hash(); }
  const std::vector<u64>& delta() const { return delta_; }
  const ScaleRound& scale_q() const { return scale_q_; }
  const NttTables* batch_ntt() const { return batch_ntt_.get(); }

  // Heuristic noise magnitudes (log2 of |t (c . s) mod Q|), calibrated to sit
  // a few bits above measured values.
  double fresh_noise() const {
    return std::log2(static_cast<double>(t())) + std::log2(static_cast<double>(n())) + std::log2(params_.noise_stddev) + 7;
  }
  double mul_noise(double a, double b) const {
    return std::max(a, b) + std::log2(static_cast<double>(t())) + std::log2(static_cast<double>(n())) + 1;
  }
  double budget_from_noise(double noise) const { return ring_->log2_q() - 1 - noise; }

 private:
  std::shared_ptr<const RingContext> ring_;
  Modulus t_mod_;
  HeParams params_;
  std::vector<u64> delta_;  // floor(Q / t) mod q_i
  ScaleRound scale_q_;
  std::shared_ptr<NttTables> batch_ntt_;
};

namespace detail {

inline std::vector<std::int64_t> sample_ternary(Prg& prg, std::size_t n) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = static_cast<std::int64_t>(prg.uniform(3)) - 1;
  return v;
}

// Centered binomial: popcount(eta bits) - popcount(eta bits).
inline std::vector<std::int64_t> sample_cbd(Prg& prg, std::size_t n, unsigned eta) {
  std::vector<std::int64_t> v(n);
  const unsigned words = (eta + 31) / 32;
  for (auto& x : v) {
    std::int64_t s = 0;
    unsigned left = eta;
    for (unsigned w = 0; w < words; ++w, left -= 32) {
      const unsigned take = std::min(left, 32u);
      const u64 mask = take == 32 ? 0xffffffffULL : ((1ULL << take) - 1);
      const u64 r = prg.next_u64();
      s += std::popcount(r & mask) - std::popcount((r >> 32) & mask);
    }
    x = s;
  }
  return v;
}

inline std::vector<u64> sample_uniform(const RingContext& ring, Prg& prg) {
  const std::size_t n = ring.n();
  std::vector<u64> out(ring.k() * n);
  for (std::size_t i = 0; i < ring.k(); ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = prg.uniform(ring.q()[i].value());
  return out;
}

inline void check_ring(const RingContext& ring, std::uint64_t h, const char* what) {
  if (h != ring.ring_hash()) throw ConfigError(std::string(what) + " was generated for a different ring");
}

inline void check_ct(const BfvContext& ctx, const HeCiphertext& c) {
  if (c.params_hash != ctx.params_hash()) throw ConfigError("ciphertext parameters do not match the context");
  if (c.size() < 2 || c.size() > 3) throw ConfigError("ciphertext must have 2 or 3 components");
  for (const auto& p : c.polys)
    if (p.size() != ctx.ring().k() * ctx.n()) throw ConfigError("ciphertext polynomial has the wrong length");
}

}  // namespace detail

inline KeySet keygen(const RingContext& ring, Prg& prg) {
  const std::size_t n = ring.n();
  const unsigned eta = ring.params().cbd_eta();
  KeySet ks;
  ks.sk.ring_hash = ks.pk.ring_hash = ks.rk.ring_hash = ring.ring_hash();
  ks.sk.s = detail::sample_ternary(prg, n);
  ks.sk.s_ntt = ring.lift_small(ks.sk.s);
  ring.ntt_q(ks.sk.s_ntt);

  auto rlwe_pair = [&](std::vector<u64>& b, std::vector<u64>& a) {
    a = detail::sample_uniform(ring, prg);  // uniform residues are uniform in either domain
    auto e = ring.lift_small(detail::sample_cbd(prg, n, eta));
    ring.ntt_q(e);
    b = ring.mul_ntt(a, ks.sk.s_ntt);
    ring.add_inplace(b, e);
    std::vector<u64> zero(b.size(), 0);
    ring.sub_inplace(zero, b);
    b = std::move(zero);  // b = -(a s + e)
  };
  rlwe_pair(ks.pk.p0, ks.pk.p1);

  const auto s2 = ring.mul_ntt(ks.sk.s_ntt, ks.sk.s_ntt);
  auto& rk = ks.rk;
  rk.base_bits = 30;
  unsigned max_bits = 0;
  for (const auto& qi : ring.q()) max_bits = std::max(max_bits, static_cast<unsigned>(std::bit_width(qi.value())));
  rk.digits_per_prime = (max_bits + rk.base_bits - 1) / rk.base_bits;
  for (std::size_t i = 0; i < ring.k(); ++i) {
    for (std::uint32_t d = 0; d < rk.digits_per_prime; ++d) {
      std::vector<u64> b, a;
      rlwe_pair(b, a);
      // Add g * s^2 with g = (Q / q_i) 2^(d w): nonzero only modulo q_i.
      const Modulus& qi = ring.q()[i];
      const u64 g = qi.mul(ring.qhat_mod_qi(i), qi.pow(2, static_cast<u64>(d) * rk.base_bits));
      for (std::size_t j = 0; j < n; ++j) b[i * n + j] = qi.add(b[i * n + j], qi.mul(g, s2[i * n + j]));
      rk.b.push_back(std::move(b));
      rk.a.push_back(std::move(a));
    }
  }
  return ks;
}

inline KeySet keygen(const BfvContext& ctx, Prg& prg) { return keygen(ctx.ring(), prg); }

inline HeCiphertext encrypt(const BfvContext& ctx, const PublicKey& pk, const HePlaintext& m, Prg& prg) {
  const RingContext& ring = ctx.ring();
  detail::check_ring(ring, pk.ring_hash, "public key");
  if (m.t != ctx.t() || m.coeffs.size() != ctx.n()) throw ConfigError("plaintext encoding does not match the parameters");
  const std::size_t n = ring.n();
  const unsigned eta = ring.params().cbd_eta();
  auto u = ring.lift_small(detail::sample_ternary(prg, n));
  ring.ntt_q(u);
  HeCiphertext c;
  c.params_hash = ctx.params_hash();
  c.encoding = m.encoding;
  c.noise_estimate = ctx.fresh_noise();
  c.polys.resize(2);
  for (int comp = 0; comp < 2; ++comp) {
    auto poly = ring.mul_ntt(comp == 0 ? pk.p0 : pk.p1, u);
    ring.intt_q(poly);
    ring.add_inplace(poly, ring.lift_small(detail::sample_cbd(prg, n, eta)));
    c.polys[static_cast<std::size_t>(comp)] = std::move(poly);
  }
  auto& c0 = c.polys[0];
  for (std::size_t i = 0; i < ring.k(); ++i) {
    const Modulus& qi = ring.q()[i];
    const u64 d = ctx.delta()[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (m.coeffs[j] >= ctx.t()) throw ConfigError("plaintext coefficient not reduced mod t");
      c0[i * n + j] = qi.add(c0[i * n + j], qi.mul(d, m.coeffs[j]));
    }
  }
  return c;
}

namespace detail {

// c0 + c1 s (+ c2 s^2) over Q, coefficient form.
inline std::vector<u64> dot_secret(const BfvContext& ctx, const SecretKey& sk, const HeCiphertext& c) {
  const RingContext& ring = ctx.ring();
  detail::check_ring(ring, sk.ring_hash, "secret key");
  detail::check_ct(ctx, c);
  std::vector<u64> acc = c.polys[1];
  ring.ntt_q(acc);
  acc = ring.mul_ntt(acc, sk.s_ntt);
  if (c.size() == 3) {
    auto c2 = c.polys[2];
    ring.ntt_q(c2);
    ring.add_inplace(acc, ring.mul_ntt(ring.mul_ntt(c2, sk.s_ntt), sk.s_ntt));
  }
  ring.intt_q(acc);
  ring.add_inplace(acc, c.polys[0]);
  return acc;
}

// log2 of max |[t x]_Q| over coefficients, centered; -inf when zero.
inline double noise_log2(const BfvContext& ctx, const std::vector<u64>& x) {
  const RingContext& ring = ctx.ring();
  const std::size_t n = ring.n(), k = ring.k();
  const Garner& g = ring.garner_q();
  std::vector<u64> r(k), v(k);
  long double worst = 0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) r[i] = ring.q()[i].mul(x[i * n + j], ctx.t() % ring.q()[i].value());
    g.digits(r.data(), 1, v.data());
    if (g.is_negative(v.data())) {
      for (std::size_t i = 0; i < k; ++i) r[i] = ring.q()[i].neg(r[i]);
      g.digits(r.data(), 1, v.data());
    }
    worst = std::max(worst, g.magnitude(v.data()));
  }
  return worst == 0 ? -INFINITY : static_cast<double>(std::log2(worst));
}

}  // namespace detail

// Remaining noise budget in bits: floor(log2 Q - 1 - log2 |t (c . s) mod Q|),
// clamped at 0. Decryption is correct while this is positive.
inline int noise_budget(const BfvContext& ctx, const SecretKey& sk, const HeCiphertext& c) {
  const double nl = detail::noise_log2(ctx, detail::dot_secret(ctx, sk, c));
  if (std::isinf(nl)) return static_cast<int>(std::floor(ctx.ring().log2_q() - 1));
  return std::max(0, static_cast<int>(std::floor(ctx.ring().log2_q() - 1 - nl)));
}

inline HePlaintext decrypt(const BfvContext& ctx, const SecretKey& sk, const HeCiphertext& c) {
  const auto x = detail::dot_secret(ctx, sk, c);
  const double nl = detail::noise_log2(ctx, x);
  if (!std::isinf(nl) && std::floor(ctx.ring().log2_q() - 1 - nl) <= 0)
    throw DecryptionFailure("decryption failed: noise budget exhausted");
  const RingContext& ring = ctx.ring();
  const std::size_t n = ring.n(), k = ring.k();
  HePlaintext m;
  m.t = ctx.t();
  m.encoding = c.encoding;
  m.coeffs.resize(n);
  std::vector<u64> v(k);
  for (std::size_t j = 0; j < n; ++j) {
    ring.garner_q().digits(x.data() + j, n, v.data());
    m.coeffs[j] = ctx.scale_q()(v.data(), k) % ctx.t();
  }
  return m;
}

inline HeCiphertext he_add(const BfvContext& ctx, const HeCiphertext& a, const HeCiphertext& b) {
  detail::check_ct(ctx, a);
  detail::check_ct(ctx, b);
  if (a.encoding != b.encoding) throw ConfigError("he_add: encoding mismatch");
  HeCiphertext r = a.size() >= b.size() ? a : b;
  const HeCiphertext& o = a.size() >= b.size() ? b : a;
  for (std::size_t p = 0; p < o.size(); ++p) ctx.ring().add_inplace(r.polys[p], o.polys[p]);
  r.noise_estimate = std::max(a.noise_estimate, b.noise_estimate) + 1;
  r.depth = std::max(a.depth, b.depth);
  return r;
}

inline HeCiphertext he_negate(const BfvContext& ctx, const HeCiphertext& a) {
  detail::check_ct(ctx, a);
  HeCiphertext r = a;
  for (auto& p : r.polys) {
    std::vector<u64> zero(p.size(), 0);
    ctx.ring().sub_inplace(zero, p);
    p = std::move(zero);
  }
  return r;
}

inline HeCiphertext he_sub(const BfvContext& ctx, const HeCiphertext& a, const HeCiphertext& b) {
  return he_add(ctx, a, he_negate(ctx, b));
}

// Multiplies by a public integer (reduced mod t, centered).
inline HeCiphertext he_mul_scalar(const BfvContext& ctx, const HeCiphertext& a, std::int64_t k) {
  detail::check_ct(ctx, a);
  const auto t = static_cast<std::int64_t>(ctx.t());
  std::int64_t kc = k % t;
  if (kc > t / 2) kc -= t;
  if (kc < -t / 2) kc += t;
  HeCiphertext r = a;
  const RingContext& ring = ctx.ring();
  const std::size_t n = ring.n();
  for (auto& p : r.polys)
    for (std::size_t i = 0; i < ring.k(); ++i) {
      const Modulus& qi = ring.q()[i];
      const ShoupOperand w(qi.from_signed(kc), qi.value());
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = mul_shoup(p[i * n + j], w, qi.value());
    }
  r.noise_estimate = a.noise_estimate + std::log2(static_cast<double>(std::max<std::int64_t>(1, kc < 0 ? -kc : kc))) + 1;
  return r;
}

// Adds a plaintext (Δ m into c0); noise unchanged up to rounding.
inline HeCiphertext he_add_plain(const BfvContext& ctx, const HeCiphertext& a, const HePlaintext& m) {
  detail::check_ct(ctx, a);
  if (m.t != ctx.t() || m.coeffs.size() != ctx.n()) throw ConfigError("he_add_plain: plaintext does not match");
  HeCiphertext r = a;
  const RingContext& ring = ctx.ring();
  const std::size_t n = ring.n();
  for (std::size_t i = 0; i < ring.k(); ++i) {
    const Modulus& qi = ring.q()[i];
    for (std::size_t j = 0; j < n; ++j)
      r.polys[0][i * n + j] = qi.add(r.polys[0][i * n + j], qi.mul(ctx.delta()[i], m.coeffs[j]));
  }
  r.noise_estimate = a.noise_estimate + 0.5;
  return r;
}

// Key switching of the s^2 component back to (c0, c1).
inline HeCiphertext relinearize(const BfvContext& ctx, const HeCiphertext& a, const RelinKey& rk) {
  detail::check_ct(ctx, a);
  if (a.size() == 2) return a;
  const RingContext& ring = ctx.ring();
  detail::check_ring(ring, rk.ring_hash, "relinearization key");
  const std::size_t n = ring.n(), k = ring.k();
  if (rk.b.size() != k * rk.digits_per_prime) throw ConfigError("relinearization key has the wrong shape");
  std::vector<u64> acc0(k * n, 0), acc1(k * n, 0), digit(k * n), y(n);
  const u64 base_mask = (1ULL << rk.base_bits) - 1;
  const auto& c2 = a.polys[2];
  for (std::size_t i = 0; i < k; ++i) {
    const Modulus& qi = ring.q()[i];
    for (std::size_t j = 0; j < n; ++j) y[j] = mul_shoup(c2[i * n + j], ring.qhat_inv(i), qi.value());
    for (std::uint32_t d = 0; d < rk.digits_per_prime; ++d) {
      for (std::size_t j = 0; j < n; ++j) {
        const u64 dig = (y[j] >> (d * rk.base_bits)) & base_mask;
        for (std::size_t l = 0; l < k; ++l) digit[l * n + j] = dig;  // dig < 2^w < every q_l
      }
      ring.ntt_q(digit);
      const std::size_t idx = i * rk.digits_per_prime + d;
      ring.add_inplace(acc0, ring.mul_ntt(digit, rk.b[idx]));
      ring.add_inplace(acc1, ring.mul_ntt(digit, rk.a[idx]));
    }
  }
  ring.intt_q(acc0);
  ring.intt_q(acc1);
  HeCiphertext r = a;
  r.polys.resize(2);
  ring.add_inplace(r.polys[0], acc0);
  ring.add_inplace(r.polys[1], acc1);
  return r;
}

// Tensor product scaled by t/Q, then relinearized when `rk` is given.
inline HeCiphertext he_mul(const BfvContext& ctx, const HeCiphertext& a, const HeCiphertext& b, const RelinKey* rk,
                           BudgetPolicy policy = BudgetPolicy::Checked) {
  detail::check_ct(ctx, a);
  detail::check_ct(ctx, b);
  if (a.size() != 2 || b.size() != 2) throw ConfigError("he_mul: operands must be relinearized (2 components)");
  if (a.encoding != b.encoding) throw ConfigError("he_mul: encoding mismatch");
  const double noise = ctx.mul_noise(a.noise_estimate, b.noise_estimate);
  if (policy == BudgetPolicy::Checked && ctx.budget_from_noise(noise) <= 0)
    throw BudgetExhausted("he_mul: estimated noise budget exhausted (estimate " +
                          std::to_string(static_cast<int>(ctx.budget_from_noise(noise))) + " bits)");

  const RingContext& ring = ctx.ring();
  const std::size_t n = ring.n(), kq = ring.k(), ka = ring.all().size(), kp = ka - kq;
  auto lift = [&](const std::vector<u64>& p) {
    auto e = ring.extend_to_all(p);
    for (std::size_t i = 0; i < ka; ++i) ring.all_ntt(i).forward(e.data() + i * n);
    return e;
  };
  const auto a0 = lift(a.polys[0]), a1 = lift(a.polys[1]);
  const auto b0 = lift(b.polys[0]), b1 = lift(b.polys[1]);
  std::vector<std::vector<u64>> d(3, std::vector<u64>(ka * n));
  for (std::size_t i = 0; i < ka; ++i) {
    const Modulus& m = ring.all()[i];
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t o = i * n + j;
      d[0][o] = m.mul(a0[o], b0[o]);
      d[1][o] = m.add(m.mul(a0[o], b1[o]), m.mul(a1[o], b0[o]));
      d[2][o] = m.mul(a1[o], b1[o]);
    }
  }

  HeCiphertext r;
  r.params_hash = a.params_hash;
  r.encoding = a.encoding;
  r.noise_estimate = noise;
  r.depth = std::max(a.depth, b.depth) + 1;
  const Garner& g = ring.garner_all();
  const u64 t = ctx.t();
  std::vector<u64> v(ka);
  for (auto& poly : d) {
    for (std::size_t i = 0; i < ka; ++i) ring.all_ntt(i).inverse(poly.data() + i * n);
    std::vector<u64> out(kq * n);
    for (std::size_t j = 0; j < n; ++j) {
      g.digits(poly.data() + j, n, v.data());
      const bool neg = g.is_negative(v.data());
      // x = L + Q H with L from the Q digits; round(t x / Q) = t H + round(t L / Q).
      const u64 low = ctx.scale_q()(v.data(), kq);
      for (std::size_t l = 0; l < kq; ++l) {
        const Modulus& ql = ring.q()[l];
        const auto& pp = ring.p_prefix_mod_q(l);
        u64 h = 0;
        for (std::size_t i = 0; i < kp; ++i) h = ql.add(h, ql.mul(ql.reduce(v[kq + i]), pp[i]));
        if (neg) h = ql.sub(h, ring.p_mod_q(l));
        out[l * n + j] = ql.add(ql.mul(h, t), ql.reduce(low));
      }
    }
    r.polys.push_back(std::move(out));
  }
  return rk ? relinearize(ctx, r, *rk) : r;
}

inline HeCiphertext he_mul(const BfvContext& ctx, const HeCiphertext& a, const HeCiphertext& b, const RelinKey& rk,
                           BudgetPolicy policy = BudgetPolicy::Checked) {
  return he_mul(ctx, a, b, &rk, policy);
}

inline double estimated_budget(const BfvContext& ctx, const HeCiphertext& c) { return ctx.budget_from_noise(c.noise_estimate); }

}  // namespace dmpc::he
