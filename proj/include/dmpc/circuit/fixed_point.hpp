#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "dmpc/common/errors.hpp"

namespace dmpc::circuit {

// Two's-complement fixed point: value = raw / 2^frac_bits, raw in total_bits.
struct FixedPointSpec {
  std::uint32_t total_bits = 16;
  std::uint32_t frac_bits = 8;

  FixedPointSpec() = default;
  FixedPointSpec(std::uint32_t total, std::uint32_t frac) : total_bits(total), frac_bits(frac) { validate(); }

  void validate() const {
    if (total_bits == 0 || total_bits > 64 || frac_bits >= total_bits)
      throw ConfigError("fixed-point spec (" + std::to_string(total_bits) + "," + std::to_string(frac_bits) +
                        ") violates 0 <= frac < total <= 64");
  }

  std::int64_t min_raw() const { return total_bits == 64 ? INT64_MIN : -(std::int64_t{1} << (total_bits - 1)); }
  std::int64_t max_raw() const { return total_bits == 64 ? INT64_MAX : (std::int64_t{1} << (total_bits - 1)) - 1; }
  double quantum() const { return std::ldexp(1.0, -static_cast<int>(frac_bits)); }

  bool fits(std::int64_t raw) const { return raw >= min_raw() && raw <= max_raw(); }

  // Nearest representable raw value; throws if outside the range.
  std::int64_t encode(double x) const {
    const double scaled = std::nearbyint(std::ldexp(x, static_cast<int>(frac_bits)));
    if (!(scaled >= static_cast<double>(min_raw()) && scaled <= static_cast<double>(max_raw())))
      throw WidthError("value " + std::to_string(x) + " not representable in fixed point (" + std::to_string(total_bits) +
                       "," + std::to_string(frac_bits) + ")");
    return static_cast<std::int64_t>(scaled);
  }
  double decode(std::int64_t raw) const { return std::ldexp(static_cast<double>(raw), -static_cast<int>(frac_bits)); }

  // Raw value as the unsigned bit pattern of width total_bits.
  std::uint64_t to_pattern(std::int64_t raw) const {
    const auto u = static_cast<std::uint64_t>(raw);
    return total_bits == 64 ? u : (u & ((std::uint64_t{1} << total_bits) - 1));
  }
  std::int64_t from_pattern(std::uint64_t bits) const {
    if (total_bits == 64) return static_cast<std::int64_t>(bits);
    const std::uint64_t sign = std::uint64_t{1} << (total_bits - 1);
    bits &= (sign << 1) - 1;
    return static_cast<std::int64_t>(bits ^ sign) - static_cast<std::int64_t>(sign);
  }

  bool operator==(const FixedPointSpec&) const = default;
};

}  // namespace dmpc::circuit
