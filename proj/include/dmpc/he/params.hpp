#pragma once

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "dmpc/common/sha256.hpp"
#include "dmpc/he/modarith.hpp"

namespace dmpc::he {

// Largest NTT-friendly primes below 2^bits that support every ring degree up
// to 8192 (p = 1 mod 16384).
inline std::vector<u64> ntt_primes(unsigned bits, std::size_t count) {
  static std::mutex mu;
  static std::map<std::pair<unsigned, std::size_t>, std::vector<u64>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({bits, count});
  if (it == cache.end()) it = cache.emplace(std::make_pair(bits, count), find_primes(bits, 16384, count)).first;
  return it->second;
}

inline constexpr std::uint32_t kMaxDegree = 8192;

// Plaintext moduli: ~20-bit primes, all = 1 mod 16384 so each supports
// batching at every ring degree.
inline std::vector<u64> plain_moduli(std::size_t count, unsigned bits = 20) {
  return ntt_primes(bits, count);
}

// Ring and plaintext parameters. Desk-scale: parameter sets are not
// security-audited.
struct HeParams {
  std::uint32_t n = 4096;
  std::vector<u64> q;  // coefficient modulus primes; Q is their product
  u64 t = 0;           // plaintext modulus
  double noise_stddev = 3.2;

  // n in {1024, 2048, 4096, 8192}; three 60-bit primes (Q ~ 2^180).
  static HeParams defaults(std::uint32_t n = 4096, u64 t = 0) {
    HeParams p;
    p.n = n;
    p.q = ntt_primes(60, 3);
    p.t = t ? t : plain_moduli(1).front();
    p.validate();
    return p;
  }

  HeParams with_t(u64 t_new) const {
    HeParams p = *this;
    p.t = t_new;
    p.validate();
    return p;
  }

  double log2_q() const {
    double s = 0;
    for (u64 v : q) s += std::log2(static_cast<double>(v));
    return s;
  }

  // Centered binomial parameter with variance eta/2 = sigma^2.
  unsigned cbd_eta() const { return static_cast<unsigned>(std::max(1.0, std::round(2 * noise_stddev * noise_stddev))); }

  bool supports_batching() const { return is_prime(t) && (t - 1) % (2ULL * n) == 0; }

  void validate() const {
    if (n != 1024 && n != 2048 && n != 4096 && n != 8192)
      throw ConfigError("ring degree n must be one of 1024, 2048, 4096, 8192 (got " + std::to_string(n) + ")");
    if (q.empty() || q.size() > 8) throw ConfigError("coefficient modulus needs 1 to 8 primes");
    for (std::size_t i = 0; i < q.size(); ++i) {
      if ((q[i] >> 61) != 0 || !is_prime(q[i]) || (q[i] - 1) % (2ULL * n) != 0)
        throw ConfigError("coefficient prime " + std::to_string(q[i]) + " must be an NTT-friendly prime below 2^61");
      for (std::size_t j = 0; j < i; ++j)
        if (q[j] == q[i]) throw ConfigError("coefficient primes must be distinct");
    }
    if (t < 2) throw ConfigError("plaintext modulus t must be at least 2");
    for (u64 qi : q)
      if (t >= qi) throw ConfigError("plaintext modulus t must be below every coefficient prime (t < q)");
    if (!(noise_stddev > 0 && noise_stddev < 64)) throw ConfigError("noise_stddev must be in (0, 64)");
  }

  std::string describe() const {
    std::ostringstream os;
    os << "n=" << n << " log2(q)=" << static_cast<int>(std::round(log2_q())) << " (" << q.size() << " primes) t=" << t
       << " sigma=" << noise_stddev;
    return os.str();
  }

  // Identifies the ring only: keys are valid for every t over the same ring.
  std::uint64_t ring_hash() const {
    std::ostringstream os;
    os << "ring|" << n;
    for (u64 v : q) os << '|' << v;
    os << "|sigma=" << noise_stddev;
    return digest_prefix64(sha256(os.str()));
  }
  std::uint64_t hash() const {
    std::ostringstream os;
    os << ring_hash() << "|t=" << t;
    return digest_prefix64(sha256(os.str()));
  }

  bool operator==(const HeParams&) const = default;
};

}  // namespace dmpc::he
