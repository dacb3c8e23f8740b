#pragma once

#include <bit>
#include <cstring>
#include <string>

#include "dmpc/common/bytes.hpp"
#include "dmpc/he/bfv.hpp"

// Big-endian coefficient dumps. Each object starts with a 4-byte magic and
// the parameter (ciphertexts) or ring (keys) hash it belongs to.
namespace dmpc::he {

namespace detail {

inline void write_poly(ByteWriter& w, const std::vector<u64>& p) {
  w.u32(static_cast<std::uint32_t>(p.size()));
  w.reserve(8 * p.size());
  for (u64 v : p) w.u64(v);
}

inline std::vector<u64> read_poly(ByteReader& r) {
  const auto n = r.u32();
  if (n > r.remaining() / 8) throw ParseError("polynomial length exceeds payload");
  std::vector<u64> p(n);
  for (auto& v : p) v = r.u64();
  return p;
}

inline void expect_magic(ByteReader& r, const char* magic) {
  auto m = r.raw(4);
  if (std::memcmp(m.data(), magic, 4) != 0) throw ParseError(std::string("expected object tag ") + magic);
}

}  // namespace detail

inline Bytes serialize(const HeCiphertext& c) {
  ByteWriter w;
  w.raw("DMCT", 4);
  w.u64(c.params_hash);
  w.u8(static_cast<std::uint8_t>(c.encoding));
  w.u32(c.depth);
  w.u64(std::bit_cast<std::uint64_t>(c.noise_estimate));
  w.u8(static_cast<std::uint8_t>(c.polys.size()));
  for (const auto& p : c.polys) detail::write_poly(w, p);
  return w.take();
}

inline HeCiphertext parse_ciphertext(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  detail::expect_magic(r, "DMCT");
  HeCiphertext c;
  c.params_hash = r.u64();
  const auto enc = r.u8();
  if (enc != 1 && enc != 2) throw ParseError("ciphertext: unknown encoding");
  c.encoding = static_cast<Encoding>(enc);
  c.depth = r.u32();
  c.noise_estimate = std::bit_cast<double>(r.u64());
  const auto k = r.u8();
  if (k < 2 || k > 3) throw ParseError("ciphertext: component count must be 2 or 3");
  for (int i = 0; i < k; ++i) c.polys.push_back(detail::read_poly(r));
  r.expect_done("ciphertext");
  return c;
}

inline Bytes serialize(const PublicKey& pk) {
  ByteWriter w;
  w.raw("DMPK", 4);
  w.u64(pk.ring_hash);
  detail::write_poly(w, pk.p0);
  detail::write_poly(w, pk.p1);
  return w.take();
}

inline PublicKey parse_public_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  detail::expect_magic(r, "DMPK");
  PublicKey pk;
  pk.ring_hash = r.u64();
  pk.p0 = detail::read_poly(r);
  pk.p1 = detail::read_poly(r);
  r.expect_done("public key");
  return pk;
}

inline Bytes serialize(const RelinKey& rk) {
  ByteWriter w;
  w.raw("DMRK", 4);
  w.u64(rk.ring_hash);
  w.u32(rk.base_bits);
  w.u32(rk.digits_per_prime);
  w.u32(static_cast<std::uint32_t>(rk.b.size()));
  for (std::size_t i = 0; i < rk.b.size(); ++i) {
    detail::write_poly(w, rk.b[i]);
    detail::write_poly(w, rk.a[i]);
  }
  return w.take();
}

inline RelinKey parse_relin_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  detail::expect_magic(r, "DMRK");
  RelinKey rk;
  rk.ring_hash = r.u64();
  rk.base_bits = r.u32();
  rk.digits_per_prime = r.u32();
  if (rk.base_bits == 0 || rk.base_bits > 62) throw ParseError("relinearization key: bad base");
  const auto count = r.u32();
  if (count > 64) throw ParseError("relinearization key: too many components");
  for (std::uint32_t i = 0; i < count; ++i) {
    rk.b.push_back(detail::read_poly(r));
    rk.a.push_back(detail::read_poly(r));
  }
  r.expect_done("relinearization key");
  return rk;
}

inline Bytes serialize(const SecretKey& sk) {
  ByteWriter w;
  w.raw("DMSK", 4);
  w.u64(sk.ring_hash);
  w.u32(static_cast<std::uint32_t>(sk.s.size()));
  for (auto v : sk.s) w.u8(static_cast<std::uint8_t>(v + 1));
  return w.take();
}

inline SecretKey parse_secret_key(const RingContext& ring, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  detail::expect_magic(r, "DMSK");
  SecretKey sk;
  sk.ring_hash = r.u64();
  detail::check_ring(ring, sk.ring_hash, "secret key");
  const auto n = r.u32();
  if (n != ring.n()) throw ParseError("secret key: wrong ring degree");
  sk.s.resize(n);
  for (auto& v : sk.s) {
    const auto b = r.u8();
    if (b > 2) throw ParseError("secret key: coefficient outside {-1, 0, 1}");
    v = static_cast<std::int64_t>(b) - 1;
  }
  r.expect_done("secret key");
  sk.s_ntt = ring.lift_small(sk.s);
  ring.ntt_q(sk.s_ntt);
  return sk;
}

}  // namespace dmpc::he
