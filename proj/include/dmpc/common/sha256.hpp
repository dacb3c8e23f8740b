#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include <openssl/evp.h>

#include "dmpc/common/errors.hpp"

namespace dmpc {

using Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (OpenSSL EVP).
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> data) {
    if (EVP_DigestUpdate(ctx_, data.data(), data.size()) != 1) throw Error("SHA-256 update failed");
    return *this;
  }
  Sha256& update(std::string_view s) {
    return update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

  Digest finish() {
    Digest d{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, d.data(), &len) != 1 || len != d.size()) throw Error("SHA-256 final failed");
    return d;
  }

 private:
  EVP_MD_CTX* ctx_;
};

inline Digest sha256(std::span<const std::uint8_t> data) { return Sha256().update(data).finish(); }
inline Digest sha256(std::string_view s) { return Sha256().update(s).finish(); }

// First eight digest bytes as a big-endian integer.
inline std::uint64_t digest_prefix64(const Digest& d) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace dmpc
