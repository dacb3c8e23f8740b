#pragma once

#include <algorithm>
#include <vector>

#include "dmpc/market/computation.hpp"

// Assembling maker inputs from pooled data: each pooled LD count is split
// across makers so that the per-maker shares sum back to the pooled value.
namespace dmpc::market {

// Splits `v` into `parts` non-negative shares that sum to v.
inline std::vector<std::uint64_t> split_count(Prg& prg, std::uint64_t v, std::uint32_t parts) {
  std::vector<std::uint64_t> cut(parts - 1);
  for (auto& c : cut) c = prg.uniform(v + 1);
  std::sort(cut.begin(), cut.end());
  std::vector<std::uint64_t> out(parts);
  std::uint64_t prev = 0;
  for (std::uint32_t i = 0; i + 1 < parts; ++i) {
    out[i] = cut[i] - prev;
    prev = cut[i];
  }
  out[parts - 1] = v - prev;
  return out;
}

inline std::vector<MakerInput> split_ld(const std::vector<analytics::HaplotypeCounts>& pooled, std::uint32_t makers, Prg& prg) {
  if (makers < 1) throw ConfigError("a session needs at least one maker");
  std::vector<MakerInput> out(makers);
  for (const auto& h : pooled) {
    std::vector<analytics::HaplotypeCounts> shares(makers);
    for (std::size_t f = 0; f < 4; ++f) {
      const auto parts = split_count(prg, h.field(f), makers);
      for (std::uint32_t j = 0; j < makers; ++j) {
        std::uint64_t fields[4] = {shares[j].n_AB, shares[j].n_Ab, shares[j].n_aB, shares[j].n_ab};
        fields[f] = parts[j];
        shares[j] = analytics::HaplotypeCounts::from_fields(fields);
      }
    }
    for (std::uint32_t j = 0; j < makers; ++j) out[j].ld.push_back(shares[j]);
  }
  return out;
}

// `instances` random pooled counts with N <= n_max, split across makers.
inline std::vector<MakerInput> random_ld_inputs(std::uint32_t instances, std::uint32_t makers, std::uint64_t n_max, Prg& prg) {
  std::vector<analytics::HaplotypeCounts> pooled;
  for (std::uint32_t i = 0; i < instances; ++i) pooled.push_back(analytics::random_haplotype_counts(prg, n_max));
  return split_ld(pooled, makers, prg);
}

// One maker holding quantized rows [first, first + count) of `s`.
inline MakerInput lr_rows(const analytics::LrModel& m, const analytics::LrSamples& s, std::size_t first, std::size_t count) {
  if (s.dims() != m.dims())
    throw ConfigError("sample rows have " + std::to_string(s.dims()) + " features, the model expects " + std::to_string(m.dims()));
  if (first + count > s.rows.size()) throw ConfigError("row range exceeds the sample file");
  MakerInput in;
  for (std::size_t i = first; i < first + count; ++i) in.lr_rows.push_back(analytics::quantize_row(m.spec, s.rows[i]));
  return in;
}

}  // namespace dmpc::market
