#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/analytics/ld.hpp"
#include "dmpc/circuit/arith.hpp"
#include "dmpc/circuit/builder.hpp"

namespace dmpc::analytics {

using circuit::BitVector;
using circuit::Bits;
using circuit::Circuit;
using circuit::CircuitBuilder;

struct LdCircuitSpec {
  std::uint32_t count_bits = 11;  // width of each maker-supplied count
  std::uint32_t instances = 1;
  LdThreshold threshold{};
  std::uint32_t makers = 1;  // partial counts are summed across makers

  static constexpr std::uint32_t kMaxWireWidth = 128;

  void validate() const {
    if (count_bits < 1 || count_bits > 32) throw WidthError("LD count_bits must be in [1, 32]");
    if (instances < 1 || instances > 100000) throw ConfigError("LD instance count must be in [1, 100000]");
    if (makers < 1 || makers > 64) throw ConfigError("LD maker count must be in [1, 64]");
    threshold.validate();
  }

  // Largest total N representable by the inputs.
  std::uint64_t max_total() const { return 4 * static_cast<std::uint64_t>(makers) * ((1ULL << count_bits) - 1); }

  std::string group_name(std::uint32_t maker, std::uint32_t instance, std::size_t field) const {
    return "m" + std::to_string(maker) + ".ld" + std::to_string(instance) + "." + kHaplotypeFields[field];
  }
};

namespace detail {

inline std::size_t bit_length(std::uint64_t v) {
  std::size_t n = 0;
  while (v) {
    ++n;
    v >>= 1;
  }
  return n;
}

// Widening sum of a list of unsigned words, as a balanced adder tree.
inline Bits sum_tree(CircuitBuilder& cb, std::vector<Bits> xs) {
  while (xs.size() > 1) {
    std::vector<Bits> next;
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) next.push_back(circuit::arith::add_unsigned(cb, xs[i], xs[i + 1]));
    if (xs.size() % 2) next.push_back(xs.back());
    xs = std::move(next);
  }
  return xs.front();
}

inline void check_wire(const Bits& b, const char* what) {
  if (b.size() > LdCircuitSpec::kMaxWireWidth)
    throw WidthError(std::string("LD circuit: ") + what + " needs " + std::to_string(b.size()) + " bits, above the " +
                     std::to_string(LdCircuitSpec::kMaxWireWidth) + "-bit limit");
}

}  // namespace detail

// Decision bit for one instance from aggregated counts.
inline circuit::Bit ld_decision(CircuitBuilder& cb, const Bits counts[4], const LdThreshold& th) {
  namespace ar = circuit::arith;
  const Bits& ab = counts[0];
  const Bits n_A = ar::add_unsigned(cb, counts[0], counts[1]);
  const Bits n_a = ar::add_unsigned(cb, counts[2], counts[3]);
  const Bits n_B = ar::add_unsigned(cb, counts[0], counts[2]);
  const Bits n_b = ar::add_unsigned(cb, counts[1], counts[3]);
  const Bits n = ar::add_unsigned(cb, n_A, n_a);

  // |N N_AB - N_A N_B|: both products are unsigned; the difference gets one
  // extra sign bit and its magnitude fits the operand width.
  const Bits x = ar::mul_unsigned(cb, n, ab);
  const Bits y = ar::mul_unsigned(cb, n_A, n_B);
  const std::size_t w = std::max(x.size(), y.size());
  const Bits diff = ar::sub(cb, x, y, w + 1);
  const Bits mag = ar::truncate(ar::abs_value(cb, diff), w);
  const Bits sq = ar::mul_unsigned(cb, mag, mag);
  const Bits lhs = ar::shift_left(ar::mul_unsigned(cb, sq, n), 1);
  const Bits lhs_scaled = ar::mul_unsigned(cb, lhs, circuit::literal_bits(th.den, detail::bit_length(th.den)));
  detail::check_wire(lhs_scaled, "lhs * den");

  const Bits margins = ar::mul_unsigned(cb, ar::mul_unsigned(cb, n_A, n_a), ar::mul_unsigned(cb, n_B, n_b));
  const Bits rhs = ar::mul_unsigned(cb, margins, circuit::literal_bits(th.num, detail::bit_length(th.num)));
  detail::check_wire(rhs, "num * margins");
  return ar::greater_than(cb, lhs_scaled, rhs);
}

// M parallel LD tests. Party groups are ordered maker-major, then instance,
// then field, so each maker's wires are one contiguous range. Output
// "decision" has one bit per instance.
inline Circuit build_ld_circuit(const LdCircuitSpec& spec) {
  spec.validate();
  CircuitBuilder cb;
  // inputs[maker][instance][field]
  std::vector<std::vector<std::array<Bits, 4>>> inputs(spec.makers, std::vector<std::array<Bits, 4>>(spec.instances));
  for (std::uint32_t j = 0; j < spec.makers; ++j)
    for (std::uint32_t i = 0; i < spec.instances; ++i)
      for (std::size_t f = 0; f < 4; ++f) inputs[j][i][f] = cb.input(spec.group_name(j, i, f), j, spec.count_bits);

  Bits decisions(spec.instances);
  for (std::uint32_t i = 0; i < spec.instances; ++i) {
    Bits agg[4];
    for (std::size_t f = 0; f < 4; ++f) {
      std::vector<Bits> parts;
      for (std::uint32_t j = 0; j < spec.makers; ++j) parts.push_back(inputs[j][i][f]);
      agg[f] = detail::sum_tree(cb, std::move(parts));
    }
    decisions[i] = ld_decision(cb, agg, spec.threshold);
  }
  cb.output("decision", decisions);
  return cb.build();
}

inline Circuit build_ld_circuit(std::uint32_t count_bits, std::uint32_t instances, std::uint64_t threshold_num,
                                std::uint64_t threshold_den, std::uint32_t makers = 1) {
  return build_ld_circuit(LdCircuitSpec{count_bits, instances, {threshold_num, threshold_den}, makers});
}

// Input bits of one maker: its partial counts for every instance.
inline BitVector ld_maker_bits(const LdCircuitSpec& spec, const std::vector<HaplotypeCounts>& counts) {
  if (counts.size() != spec.instances)
    throw ConfigError("LD maker input has " + std::to_string(counts.size()) + " instances, circuit expects " +
                      std::to_string(spec.instances));
  BitVector bits;
  bits.reserve(static_cast<std::size_t>(spec.instances) * 4 * spec.count_bits);
  for (const auto& c : counts)
    for (std::size_t f = 0; f < 4; ++f) {
      if (spec.count_bits < 64 && (c.field(f) >> spec.count_bits) != 0)
        throw WidthError("count " + std::to_string(c.field(f)) + " does not fit in " + std::to_string(spec.count_bits) + " bits");
      circuit::append_bits(bits, c.field(f), spec.count_bits);
    }
  return bits;
}

// Concatenated inputs of all makers (maker-major), ready for eval_plain.
inline BitVector ld_input_bits(const LdCircuitSpec& spec, const std::vector<std::vector<HaplotypeCounts>>& per_maker) {
  if (per_maker.size() != spec.makers) throw ConfigError("LD input: maker count mismatch");
  BitVector all;
  for (const auto& m : per_maker) {
    auto b = ld_maker_bits(spec, m);
    all.insert(all.end(), b.begin(), b.end());
  }
  return all;
}

}  // namespace dmpc::analytics
