#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dmpc/common/errors.hpp"
#include "dmpc/common/prg.hpp"

namespace dmpc::analytics {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct HaplotypeCounts {
  std::uint64_t n_AB = 0, n_Ab = 0, n_aB = 0, n_ab = 0;

  std::uint64_t N() const { return n_AB + n_Ab + n_aB + n_ab; }
  std::uint64_t N_A() const { return n_AB + n_Ab; }
  std::uint64_t N_a() const { return n_aB + n_ab; }
  std::uint64_t N_B() const { return n_AB + n_aB; }
  std::uint64_t N_b() const { return n_Ab + n_ab; }

  std::uint64_t field(std::size_t i) const {
    switch (i) {
      case 0: return n_AB;
      case 1: return n_Ab;
      case 2: return n_aB;
      default: return n_ab;
    }
  }
  static HaplotypeCounts from_fields(const std::uint64_t* f) { return {f[0], f[1], f[2], f[3]}; }

  HaplotypeCounts& operator+=(const HaplotypeCounts& o) {
    n_AB += o.n_AB;
    n_Ab += o.n_Ab;
    n_aB += o.n_aB;
    n_ab += o.n_ab;
    return *this;
  }
  bool operator==(const HaplotypeCounts&) const = default;
};

inline constexpr const char* kHaplotypeFields[4] = {"n_AB", "n_Ab", "n_aB", "n_ab"};

struct GenotypeCounts {
  std::uint64_t n_AA = 0, n_Aa = 0, n_aa = 0;
};

struct AlleleCounts {
  std::uint64_t N_A = 0, N_a = 0, N = 0;
  Rational p_A() const { return Rational(N_A, N); }
  Rational p_a() const { return Rational(N_a, N); }
};

inline AlleleCounts genotype_to_allele_counts(const GenotypeCounts& g) {
  const std::uint64_t individuals = g.n_AA + g.n_Aa + g.n_aa;
  if (individuals == 0) throw UndefinedStatistic("allele frequencies undefined: no genotypes");
  return {2 * g.n_AA + g.n_Aa, 2 * g.n_aa + g.n_Aa, 2 * individuals};
}

// Significance threshold as an exact rational num/den.
struct LdThreshold {
  std::uint64_t num = 3841;
  std::uint64_t den = 1000;

  void validate() const {
    if (den == 0) throw ConfigError("threshold denominator must be positive");
    if (num >= (1ULL << 32) || den >= (1ULL << 32)) throw WidthError("threshold num/den must each fit 32 bits");
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct LdResult {
  BigInt lhs;             // 2N (N N_AB - N_A N_B)^2
  BigInt margin_product;  // N_A N_a N_B N_b
  BigInt rhs;             // num * margin_product
  Rational chi_square;    // lhs / margin_product
  Rational d_coefficient;  // p_AB - p_A p_B
  bool decision = false;  // lhs * den > rhs
};

// Exact evaluation of the LD decision rule; the reference for both secure
// backends.
inline LdResult ld_decide_plain(const HaplotypeCounts& c, const LdThreshold& th = {}) {
  th.validate();
  if (c.N_A() == 0 || c.N_a() == 0 || c.N_B() == 0 || c.N_b() == 0)
    throw UndefinedStatistic("LD statistic undefined: a marginal allele count is zero");
  const BigInt N = c.N();
  const BigInt diff = N * BigInt(c.n_AB) - BigInt(c.N_A()) * BigInt(c.N_B());
  LdResult r;
  r.lhs = 2 * N * diff * diff;
  r.margin_product = BigInt(c.N_A()) * c.N_a() * c.N_B() * c.N_b();
  r.rhs = BigInt(th.num) * r.margin_product;
  r.chi_square = Rational(r.lhs, r.margin_product);
  r.d_coefficient = Rational(diff, N * N);
  r.decision = r.lhs * th.den > r.rhs;
  return r;
}

// Scaled left-hand side lhs * den, the quantity both secure paths compare.
inline BigInt ld_scaled_lhs(const LdResult& r, const LdThreshold& th) { return r.lhs * th.den; }

// Random counts with every margin positive and total N in [4, n_max].
inline HaplotypeCounts random_haplotype_counts(Prg& prg, std::uint64_t n_max) {
  if (n_max < 4) throw ConfigError("n_max must be at least 4");
  for (;;) {
    const std::uint64_t n = 4 + prg.uniform(n_max - 3);
    // Three sorted cut points split n into four parts.
    std::uint64_t cut[3] = {prg.uniform(n + 1), prg.uniform(n + 1), prg.uniform(n + 1)};
    std::sort(cut, cut + 3);
    HaplotypeCounts c{cut[0], cut[1] - cut[0], cut[2] - cut[1], n - cut[2]};
    if (c.N_A() && c.N_a() && c.N_B() && c.N_b()) return c;
  }
}

// Counts of total about n with allele frequencies in [0.2, 0.8] and linkage
// coefficient near `d`. d == 0 yields exact equilibrium: counts are the
// product family N_AB = x y, N_Ab = x (v - y), N_aB = (u - x) y,
// N_ab = (u - x)(v - y), so N N_AB = N_A N_B holds in integers.
inline HaplotypeCounts generate_haplotype_counts(Prg& prg, std::uint64_t n, double d) {
  if (n < 16) throw ConfigError("haplotype generator needs n >= 16");
  if (!(std::fabs(d) <= 0.25)) throw ConfigError("target D must lie in [-0.25, 0.25]");
  if (d == 0) {
    const auto side = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    const std::uint64_t u = side, v = n / side;
    const std::uint64_t x = 1 + prg.uniform(u - 1), y = 1 + prg.uniform(v - 1);
    return {x * y, x * (v - y), (u - x) * y, (u - x) * (v - y)};
  }
  const double pa = 0.2 + 0.6 * prg.uniform_real(), pb = 0.2 + 0.6 * prg.uniform_real();
  // Feasible D keeps every haplotype frequency in [0, 1].
  const double lo = std::max(-pa * pb, -(1 - pa) * (1 - pb));
  const double hi = std::min(pa * (1 - pb), (1 - pa) * pb);
  const double dd = std::clamp(d, lo, hi);
  const double f[4] = {pa * pb + dd, pa * (1 - pb) - dd, (1 - pa) * pb - dd, (1 - pa) * (1 - pb) + dd};
  std::uint64_t c[4];
  std::uint64_t total = 0;
  for (int i = 0; i < 3; ++i) {
    c[i] = static_cast<std::uint64_t>(std::llround(f[i] * static_cast<double>(n)));
    total += c[i];
  }
  c[3] = total >= n ? 0 : n - total;
  return HaplotypeCounts::from_fields(c);
}

// CSV with header n_AB,n_Ab,n_aB,n_ab; one instance per row.
inline void write_haplotype_csv(std::ostream& os, const std::vector<HaplotypeCounts>& rows) {
  os << "n_AB,n_Ab,n_aB,n_ab\n";
  for (const auto& r : rows) os << r.n_AB << ',' << r.n_Ab << ',' << r.n_aB << ',' << r.n_ab << '\n';
}

inline std::vector<HaplotypeCounts> read_haplotype_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("haplotype CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n_AB,n_Ab,n_aB,n_ab") throw ParseError("haplotype CSV: header must be n_AB,n_Ab,n_aB,n_ab");
  std::vector<HaplotypeCounts> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::uint64_t f[4];
    std::istringstream ls(line);
    for (int i = 0; i < 4; ++i) {
      std::string cell;
      if (!std::getline(ls, cell, ',')) throw ParseError("haplotype CSV line " + std::to_string(lineno) + ": expected 4 fields");
      try {
        std::size_t pos = 0;
        if (cell.empty() || cell[0] == '-') throw std::invalid_argument("sign");
        f[i] = std::stoull(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("haplotype CSV line " + std::to_string(lineno) + ": '" + cell + "' is not a non-negative integer");
      }
    }
    std::string extra;
    if (std::getline(ls, extra)) throw ParseError("haplotype CSV line " + std::to_string(lineno) + ": too many fields");
    rows.push_back(HaplotypeCounts::from_fields(f));
  }
  return rows;
}

inline std::vector<HaplotypeCounts> read_haplotype_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_haplotype_csv(f);
}

}  // namespace dmpc::analytics
