#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "dmpc/analytics/ld.hpp"
#include "dmpc/analytics/lr.hpp"
#include "dmpc/common/bytes.hpp"
#include "dmpc/he/encoding.hpp"
#include "dmpc/he/serialize.hpp"

// Homomorphic evaluation plans. Values that outgrow one plaintext modulus are
// computed once per modulus of a CRT basis sharing a single ring and key set,
// then recombined after decryption.
namespace dmpc::analytics {

// Plaintext moduli whose product exceeds a bound, plus CRT recombination.
class CrtBasis {
 public:
  static constexpr std::size_t kMaxModuli = 8;

  CrtBasis() = default;
  explicit CrtBasis(std::vector<he::u64> moduli) : moduli_(std::move(moduli)) {
    product_ = 1;
    for (auto m : moduli_) product_ *= m;
  }

  // Fewest moduli from the batching-friendly family with product > bound.
  static CrtBasis covering(const BigInt& bound) {
    const auto family = he::plain_moduli(kMaxModuli);
    BigInt p = 1;
    for (std::size_t k = 0; k < family.size(); ++k) {
      p *= family[k];
      if (p > bound) return CrtBasis(std::vector<he::u64>(family.begin(), family.begin() + static_cast<std::ptrdiff_t>(k + 1)));
    }
    throw ConfigError("plaintext space too small: values up to 2^" + std::to_string(msb_or_zero(bound) + 1) + " need more than " +
                      std::to_string(kMaxModuli) + " CRT moduli");
  }

  const std::vector<he::u64>& moduli() const { return moduli_; }
  std::size_t size() const { return moduli_.size(); }
  const BigInt& product() const { return product_; }

  // Unique x in [0, product) with x = r_i mod m_i.
  BigInt reconstruct(const std::vector<he::u64>& residues) const {
    BigInt x = 0;
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
      const BigInt mi = moduli_[i];
      const BigInt rest = product_ / mi;
      const BigInt inv = he::Modulus(moduli_[i]).inv(static_cast<he::u64>(rest % mi));
      x += BigInt(residues.at(i)) * rest % product_ * inv;
    }
    return x % product_;
  }

  // Centered representative in (-product/2, product/2].
  BigInt reconstruct_signed(const std::vector<he::u64>& residues) const {
    BigInt x = reconstruct(residues);
    if (2 * x > product_) x -= product_;
    return x;
  }

 private:
  static std::size_t msb_or_zero(const BigInt& v) { return v > 0 ? boost::multiprecision::msb(v) : 0; }
  std::vector<he::u64> moduli_;
  BigInt product_ = 1;
};

// One BFV context per CRT modulus over a shared ring.
struct HeSuite {
  std::shared_ptr<const he::RingContext> ring;
  CrtBasis basis;
  std::vector<he::BfvContext> ctx;

  HeSuite(std::shared_ptr<const he::RingContext> r, CrtBasis b) : ring(std::move(r)), basis(std::move(b)) {
    for (auto t : basis.moduli()) ctx.emplace_back(ring, t);
  }
  std::size_t slots() const { return ring->n(); }
};

// Encrypted table of `instances` x `fields` integers, replicated per CRT
// modulus. Batched listings pack up to n instances per ciphertext (one chunk);
// scalar listings use one ciphertext per instance.
struct HeListing {
  he::Encoding encoding = he::Encoding::Batched;
  std::uint32_t instances = 0;
  std::uint32_t fields = 0;
  std::uint32_t moduli = 0;
  std::uint32_t chunk_size = 1;
  std::vector<he::HeCiphertext> cts;  // [modulus][field][chunk]

  std::uint32_t chunks() const { return (instances + chunk_size - 1) / chunk_size; }
  std::size_t index(std::size_t m, std::size_t f, std::size_t c) const { return (m * fields + f) * chunks() + c; }
  he::HeCiphertext& at(std::size_t m, std::size_t f, std::size_t c) { return cts.at(index(m, f, c)); }
  const he::HeCiphertext& at(std::size_t m, std::size_t f, std::size_t c) const { return cts.at(index(m, f, c)); }

  static HeListing shaped(he::Encoding e, std::uint32_t instances, std::uint32_t fields, std::uint32_t moduli, std::size_t slots) {
    HeListing l;
    l.encoding = e;
    l.instances = instances;
    l.fields = fields;
    l.moduli = moduli;
    l.chunk_size = e == he::Encoding::Batched ? static_cast<std::uint32_t>(slots) : 1;
    l.cts.resize(static_cast<std::size_t>(moduli) * fields * l.chunks());
    return l;
  }

  bool same_shape(const HeListing& o) const {
    return encoding == o.encoding && instances == o.instances && fields == o.fields && moduli == o.moduli &&
           chunk_size == o.chunk_size;
  }
};

inline Bytes serialize(const HeListing& l) {
  ByteWriter w;
  w.raw("DMHL", 4);
  w.u8(static_cast<std::uint8_t>(l.encoding));
  w.u32(l.instances);
  w.u32(l.fields);
  w.u32(l.moduli);
  w.u32(l.chunk_size);
  w.u32(static_cast<std::uint32_t>(l.cts.size()));
  for (const auto& c : l.cts) w.blob(he::serialize(c));
  return w.take();
}

inline HeListing parse_he_listing(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  he::detail::expect_magic(r, "DMHL");
  HeListing l;
  const auto enc = r.u8();
  if (enc != 1 && enc != 2) throw ParseError("listing: unknown encoding");
  l.encoding = static_cast<he::Encoding>(enc);
  l.instances = r.u32();
  l.fields = r.u32();
  l.moduli = r.u32();
  l.chunk_size = r.u32();
  if (l.chunk_size == 0) throw ParseError("listing: zero chunk size");
  const auto n = r.u32();
  if (n != static_cast<std::size_t>(l.moduli) * l.fields * l.chunks()) throw ParseError("listing: ciphertext count mismatch");
  for (std::uint32_t i = 0; i < n; ++i) l.cts.push_back(he::parse_ciphertext(r.blob()));
  r.expect_done("listing");
  return l;
}

// Encrypts values[instance][field] under every modulus of the suite.
inline HeListing encrypt_listing(const HeSuite& s, const he::PublicKey& pk, const std::vector<std::vector<std::int64_t>>& values,
                                 std::uint32_t fields, he::Encoding enc, Prg& prg) {
  auto l = HeListing::shaped(enc, static_cast<std::uint32_t>(values.size()), fields, static_cast<std::uint32_t>(s.basis.size()),
                             s.slots());
  for (const auto& row : values)
    if (row.size() != fields) throw ConfigError("listing row has " + std::to_string(row.size()) + " fields, expected " + std::to_string(fields));
  for (std::size_t m = 0; m < s.ctx.size(); ++m) {
    const auto& ctx = s.ctx[m];
    for (std::uint32_t f = 0; f < fields; ++f)
      for (std::uint32_t c = 0; c < l.chunks(); ++c) {
        he::HePlaintext pt;
        if (enc == he::Encoding::Batched) {
          std::vector<std::int64_t> v;
          for (std::size_t i = c * l.chunk_size; i < std::min<std::size_t>(values.size(), (c + 1) * l.chunk_size); ++i)
            v.push_back(values[i][f]);
          pt = he::BatchEncoder(ctx).encode(v);
        } else {
          pt = he::encode_scalar(ctx, values[c][f]);
        }
        l.at(m, f, c) = he::encrypt(ctx, pk, pt, prg);
      }
  }
  return l;
}

// Plaintext residues[modulus][field][instance] of a listing.
inline std::vector<std::vector<std::vector<he::u64>>> decrypt_listing(const HeSuite& s, const he::SecretKey& sk, const HeListing& l) {
  if (l.moduli != s.basis.size()) throw ConfigError("listing modulus count does not match the suite");
  std::vector<std::vector<std::vector<he::u64>>> out(l.moduli, std::vector<std::vector<he::u64>>(l.fields));
  for (std::size_t m = 0; m < l.moduli; ++m)
    for (std::size_t f = 0; f < l.fields; ++f)
      for (std::size_t c = 0; c < l.chunks(); ++c) {
        const auto pt = he::decrypt(s.ctx[m], sk, l.at(m, f, c));
        const std::size_t first = c * l.chunk_size, count = std::min<std::size_t>(l.chunk_size, l.instances - first);
        if (l.encoding == he::Encoding::Batched) {
          const auto slots = he::BatchEncoder(s.ctx[m]).decode(pt);
          out[m][f].insert(out[m][f].end(), slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(count));
        } else {
          out[m][f].push_back(he::decode_scalar(pt));
        }
      }
  return out;
}

// Element-wise sum of listings with equal shape (aggregation across makers).
inline HeListing sum_listings(const HeSuite& s, const std::vector<HeListing>& ls) {
  if (ls.empty()) throw ConfigError("no listings to aggregate");
  HeListing acc = ls.front();
  for (std::size_t k = 1; k < ls.size(); ++k) {
    if (!ls[k].same_shape(acc)) throw ProtocolError("listings from different makers have different shapes");
    for (std::size_t m = 0; m < acc.moduli; ++m)
      for (std::size_t f = 0; f < acc.fields; ++f)
        for (std::size_t c = 0; c < acc.chunks(); ++c) acc.at(m, f, c) = he::he_add(s.ctx[m], acc.at(m, f, c), ls[k].at(m, f, c));
  }
  return acc;
}

// LD test: lhs = 2N (N N_AB - N_A N_B)^2 den and rhs = num N_A N_a N_B N_b
// per instance, multiplicative depth 3. The comparison happens after
// decryption.
class LdHePlan {
 public:
  LdHePlan(std::shared_ptr<const he::RingContext> ring, LdThreshold th, std::uint64_t n_max, std::uint32_t makers = 1)
      : th_(th), n_max_(n_max), makers_(makers), suite_(ring, CrtBasis::covering(value_bound(th, n_max))) {
    th.validate();
    if (n_max < 4) throw ConfigError("LD plan: N bound must be at least 4");
    if (makers < 1) throw ConfigError("LD plan: at least one maker");
    check_budget();
  }

  // Largest lhs or rhs for total counts up to n_max: (N N_AB - N_A N_B) is at
  // most N^2/4 in magnitude and each margin at most N.
  static BigInt value_bound(const LdThreshold& th, std::uint64_t n_max) {
    const BigInt n = n_max;
    const BigInt lhs = 2 * n * (n * n / 4 + 1) * (n * n / 4 + 1) * th.den;
    const BigInt rhs = BigInt(th.num) * n * n * n * n;
    return lhs > rhs ? lhs : rhs;
  }

  const HeSuite& suite() const { return suite_; }
  const LdThreshold& threshold() const { return th_; }
  std::uint64_t n_max() const { return n_max_; }

  // Estimated budget left in the outputs under the heuristic noise model;
  // plans with a non-positive estimate are rejected at construction.
  double estimated_final_budget() const {
    double worst = INFINITY;
    for (const auto& ctx : suite_.ctx) {
      const double in = ctx.fresh_noise() + std::ceil(std::log2(static_cast<double>(makers_)));
      const double margin = in + 1, total = in + 2;
      const double x = ctx.mul_noise(total, in), y = ctx.mul_noise(margin, margin);
      const double sq = ctx.mul_noise(std::max(x, y) + 1, std::max(x, y) + 1);
      const double lhs = ctx.mul_noise(sq, total) + std::log2(2.0 * static_cast<double>(th_.den)) + 1;
      const double prod = ctx.mul_noise(ctx.mul_noise(margin, margin), ctx.mul_noise(margin, margin));
      const double rhs = prod + std::log2(std::max(1.0, static_cast<double>(th_.num))) + 1;
      worst = std::min(worst, ctx.budget_from_noise(std::max(lhs, rhs)));
    }
    return worst;
  }

  HeListing encrypt(const he::PublicKey& pk, const std::vector<HaplotypeCounts>& counts, he::Encoding enc, Prg& prg) const {
    std::vector<std::vector<std::int64_t>> v;
    for (const auto& c : counts) {
      if (c.N() > n_max_) throw ConfigError("LD counts exceed the plan's N bound of " + std::to_string(n_max_));
      v.push_back({static_cast<std::int64_t>(c.n_AB), static_cast<std::int64_t>(c.n_Ab), static_cast<std::int64_t>(c.n_aB),
                   static_cast<std::int64_t>(c.n_ab)});
    }
    return encrypt_listing(suite_, pk, v, 4, enc, prg);
  }

  // f': aggregates maker listings and returns fields (lhs, rhs).
  HeListing evaluate(const std::vector<HeListing>& listings, const he::RelinKey& rk) const {
    const HeListing in = sum_listings(suite_, listings);
    if (in.fields != 4 || in.moduli != suite_.basis.size()) throw ProtocolError("LD listing has the wrong shape");
    HeListing out = HeListing::shaped(in.encoding, in.instances, 2, in.moduli, suite_.slots());
    out.chunk_size = in.chunk_size;
    out.cts.resize(static_cast<std::size_t>(out.moduli) * 2 * out.chunks());
    for (std::size_t m = 0; m < in.moduli; ++m) {
      const auto& ctx = suite_.ctx[m];
      for (std::size_t c = 0; c < in.chunks(); ++c) {
        const auto &c_AB = in.at(m, 0, c), &c_Ab = in.at(m, 1, c), &c_aB = in.at(m, 2, c), &c_ab = in.at(m, 3, c);
        const auto n_A = he::he_add(ctx, c_AB, c_Ab);
        const auto n_a = he::he_add(ctx, c_aB, c_ab);
        const auto n_B = he::he_add(ctx, c_AB, c_aB);
        const auto n_b = he::he_add(ctx, c_Ab, c_ab);
        const auto n = he::he_add(ctx, n_A, n_a);
        const auto diff = he::he_sub(ctx, he::he_mul(ctx, n, c_AB, rk), he::he_mul(ctx, n_A, n_B, rk));
        const auto sq = he::he_mul(ctx, diff, diff, rk);
        out.at(m, 0, c) = he::he_mul_scalar(ctx, he::he_mul(ctx, sq, n, rk), 2 * static_cast<std::int64_t>(th_.den));
        const auto prod = he::he_mul(ctx, he::he_mul(ctx, n_A, n_a, rk), he::he_mul(ctx, n_B, n_b, rk), rk);
        out.at(m, 1, c) = he::he_mul_scalar(ctx, prod, static_cast<std::int64_t>(th_.num));
      }
    }
    return out;
  }

  struct Outcome {
    BigInt lhs_scaled;
    BigInt rhs;
    bool decision;
  };

  std::vector<Outcome> decrypt(const he::SecretKey& sk, const HeListing& result) const {
    if (result.fields != 2) throw ProtocolError("LD result must have two fields");
    const auto res = decrypt_listing(suite_, sk, result);
    std::vector<Outcome> out;
    std::vector<he::u64> r(suite_.basis.size());
    for (std::size_t i = 0; i < result.instances; ++i) {
      Outcome o;
      for (std::size_t m = 0; m < r.size(); ++m) r[m] = res[m][0][i];
      o.lhs_scaled = suite_.basis.reconstruct(r);
      for (std::size_t m = 0; m < r.size(); ++m) r[m] = res[m][1][i];
      o.rhs = suite_.basis.reconstruct(r);
      o.decision = o.lhs_scaled > o.rhs;
      out.push_back(std::move(o));
    }
    return out;
  }

 private:
  void check_budget() const {
    const double b = estimated_final_budget();
    if (!(b > 0))
      throw ConfigError("HE depth check failed: LD plan needs multiplicative depth 3, estimated remaining budget " +
                        std::to_string(b) + " bits at n=" + std::to_string(suite_.ring->n()));
  }

  LdThreshold th_;
  std::uint64_t n_max_;
  std::uint32_t makers_;
  HeSuite suite_;
};

// LR: encrypted accumulator X.W + b (2 * frac_bits fractional bits) from
// encrypted features and plaintext weights; depth 0. The sigmoid table is
// applied to the decrypted accumulator.
class LrHePlan {
 public:
  LrHePlan(std::shared_ptr<const he::RingContext> ring, LrModel model, SigmoidTable table)
      : model_(std::move(model)), table_(std::move(table)), indexing_(model_, table_),
        suite_(ring, CrtBasis::covering(2 * acc_bound(model_) + 1)) {
    const double b = estimated_final_budget();
    if (!(b > 0)) throw ConfigError("HE budget check failed for the LR plan: " + std::to_string(b) + " bits");
  }

  // Largest |X.W + b| for features inside the fixed-point range.
  static BigInt acc_bound(const LrModel& m) {
    m.validate();
    const BigInt lim = BigInt(1) << (m.spec.total_bits - 1);
    BigInt b = BigInt(m.bias < 0 ? -m.bias : m.bias) << m.spec.frac_bits;
    for (auto w : m.weights) b += lim * (w < 0 ? -w : w);
    return b;
  }

  const HeSuite& suite() const { return suite_; }
  const LrModel& model() const { return model_; }
  const SigmoidTable& table() const { return table_; }

  double estimated_final_budget() const {
    double worst = INFINITY;
    for (const auto& ctx : suite_.ctx) {
      double noise = 0;
      for (auto w : model_.weights)
        noise = std::max(noise, ctx.fresh_noise() + std::log2(std::max<double>(1, std::fabs(static_cast<double>(w)))) + 1);
      noise += std::ceil(std::log2(static_cast<double>(model_.dims() + 1)));
      worst = std::min(worst, ctx.budget_from_noise(noise));
    }
    return worst;
  }

  HeListing encrypt(const he::PublicKey& pk, const std::vector<std::vector<std::int64_t>>& rows, he::Encoding enc, Prg& prg) const {
    for (const auto& r : rows)
      for (auto v : r)
        if (!model_.spec.fits(v)) throw WidthError("LR feature outside the fixed-point range");
    return encrypt_listing(suite_, pk, rows, static_cast<std::uint32_t>(model_.dims()), enc, prg);
  }

  HeListing evaluate(const std::vector<HeListing>& listings) const {
    const HeListing in = sum_listings(suite_, listings);
    if (in.fields != model_.dims() || in.moduli != suite_.basis.size()) throw ProtocolError("LR listing has the wrong shape");
    HeListing out = HeListing::shaped(in.encoding, in.instances, 1, in.moduli, suite_.slots());
    out.chunk_size = in.chunk_size;
    out.cts.resize(static_cast<std::size_t>(out.moduli) * out.chunks());
    const std::int64_t bias = model_.bias * (std::int64_t{1} << model_.spec.frac_bits);
    for (std::size_t m = 0; m < in.moduli; ++m) {
      const auto& ctx = suite_.ctx[m];
      he::HePlaintext bias_pt;
      if (in.encoding == he::Encoding::Batched) bias_pt = he::BatchEncoder(ctx).encode(std::vector<std::int64_t>(in.chunk_size, bias));
      else bias_pt = he::encode_scalar(ctx, bias);
      for (std::size_t c = 0; c < in.chunks(); ++c) {
        he::HeCiphertext acc = he::he_mul_scalar(ctx, in.at(m, 0, c), model_.weights[0]);
        for (std::size_t f = 1; f < in.fields; ++f) acc = he::he_add(ctx, acc, he::he_mul_scalar(ctx, in.at(m, f, c), model_.weights[f]));
        out.at(m, 0, c) = he::he_add_plain(ctx, acc, bias_pt);
      }
    }
    return out;
  }

  struct Outcome {
    std::int64_t accumulator;
    std::int64_t probability;  // raw in table().out
  };

  std::vector<Outcome> decrypt(const he::SecretKey& sk, const HeListing& result) const {
    if (result.fields != 1) throw ProtocolError("LR result must have one field");
    const auto res = decrypt_listing(suite_, sk, result);
    std::vector<Outcome> out;
    std::vector<he::u64> r(suite_.basis.size());
    for (std::size_t i = 0; i < result.instances; ++i) {
      for (std::size_t m = 0; m < r.size(); ++m) r[m] = res[m][0][i];
      const auto acc = static_cast<std::int64_t>(suite_.basis.reconstruct_signed(r));
      out.push_back({acc, table_.entries[indexing_.index(acc, table_.size())]});
    }
    return out;
  }

 private:
  LrModel model_;
  SigmoidTable table_;
  LrIndexing indexing_;
  HeSuite suite_;
};

}  // namespace dmpc::analytics
