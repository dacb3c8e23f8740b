#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include <openssl/evp.h>

#include "dmpc/common/block.hpp"
#include "dmpc/common/errors.hpp"

#if defined(__AES__) && defined(__SSE4_1__)
#include <immintrin.h>
#define DMPC_AESNI 1
#else
#define DMPC_AESNI 0
#endif

namespace dmpc {

// AES-128 encryption of single blocks under an expanded key. Uses AES-NI when
// the translation unit is compiled with -maes, else OpenSSL.
class Aes128 {
 public:
  explicit Aes128(const Block& key) { expand(key); }
  Aes128(const Aes128&) = delete;
  Aes128& operator=(const Aes128&) = delete;
#if !DMPC_AESNI
  ~Aes128() { EVP_CIPHER_CTX_free(ctx_); }
#endif

  Block encrypt(const Block& in) const {
    Block out;
    encrypt_n(&in, &out, 1);
    return out;
  }

  // Encrypts `n` independent blocks; interleaved so the rounds pipeline.
  void encrypt_n(const Block* in, Block* out, std::size_t n) const {
#if DMPC_AESNI
    constexpr std::size_t kLanes = 8;
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) encrypt_lanes<kLanes>(in + i, out + i);
    for (std::size_t rem = n - i; rem > 0; --rem, ++i) encrypt_lanes<1>(in + i, out + i);
#else
    for (std::size_t i = 0; i < n; ++i) {
      auto pt = in[i].le_bytes();
      std::array<std::uint8_t, 32> ct{};
      int len = 0;
      if (EVP_EncryptUpdate(ctx_, ct.data(), &len, pt.data(), 16) != 1 || len != 16)
        throw Error("AES encryption failed");
      out[i] = Block::from_le_bytes(std::span<const std::uint8_t, 16>(ct.data(), 16));
    }
#endif
  }

 private:
#if DMPC_AESNI
  static __m128i load(const Block& b) { return _mm_set_epi64x(static_cast<long long>(b.hi), static_cast<long long>(b.lo)); }
  static Block store(__m128i v) {
    return {static_cast<std::uint64_t>(_mm_extract_epi64(v, 0)), static_cast<std::uint64_t>(_mm_extract_epi64(v, 1))};
  }

  template <int Rcon>
  static __m128i expand_step(__m128i key) {
    __m128i t = _mm_shuffle_epi32(_mm_aeskeygenassist_si128(key, Rcon), 0xff);
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    return _mm_xor_si128(key, t);
  }

  void expand(const Block& key) {
    rk_[0] = load(key);
    rk_[1] = expand_step<0x01>(rk_[0]);
    rk_[2] = expand_step<0x02>(rk_[1]);
    rk_[3] = expand_step<0x04>(rk_[2]);
    rk_[4] = expand_step<0x08>(rk_[3]);
    rk_[5] = expand_step<0x10>(rk_[4]);
    rk_[6] = expand_step<0x20>(rk_[5]);
    rk_[7] = expand_step<0x40>(rk_[6]);
    rk_[8] = expand_step<0x80>(rk_[7]);
    rk_[9] = expand_step<0x1b>(rk_[8]);
    rk_[10] = expand_step<0x36>(rk_[9]);
  }

  template <std::size_t L>
  void encrypt_lanes(const Block* in, Block* out) const {
    __m128i s[L];
    for (std::size_t j = 0; j < L; ++j) s[j] = _mm_xor_si128(load(in[j]), rk_[0]);
    for (int r = 1; r < 10; ++r)
      for (std::size_t j = 0; j < L; ++j) s[j] = _mm_aesenc_si128(s[j], rk_[r]);
    for (std::size_t j = 0; j < L; ++j) out[j] = store(_mm_aesenclast_si128(s[j], rk_[10]));
  }

  __m128i rk_[11];
#else
  void expand(const Block& key) {
    ctx_ = EVP_CIPHER_CTX_new();
    auto k = key.le_bytes();
    if (!ctx_ || EVP_EncryptInit_ex(ctx_, EVP_aes_128_ecb(), nullptr, k.data(), nullptr) != 1)
      throw Error("AES key setup failed");
    EVP_CIPHER_CTX_set_padding(ctx_, 0);
  }

  EVP_CIPHER_CTX* ctx_ = nullptr;
#endif
};

// OpenSSL AES-128 on one block; independent of the Aes128 code path.
inline Block aes128_reference(const Block& key, const Block& in) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  auto k = key.le_bytes();
  auto pt = in.le_bytes();
  std::array<std::uint8_t, 32> ct{};
  int len = 0;
  const bool ok = ctx && EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, k.data(), nullptr) == 1 &&
                  EVP_CIPHER_CTX_set_padding(ctx, 0) == 1 &&
                  EVP_EncryptUpdate(ctx, ct.data(), &len, pt.data(), 16) == 1 && len == 16;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw Error("AES reference encryption failed");
  return Block::from_le_bytes(std::span<const std::uint8_t, 16>(ct.data(), 16));
}

}  // namespace dmpc
