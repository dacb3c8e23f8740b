#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dmpc/circuit/arith.hpp"
#include "dmpc/circuit/builder.hpp"
#include "dmpc/circuit/fixed_point.hpp"
#include "dmpc/common/prg.hpp"

namespace dmpc::analytics {

using circuit::FixedPointSpec;

// Pre-trained weights in fixed point. Raw values carry spec.frac_bits
// fractional bits.
struct LrModel {
  FixedPointSpec spec{16, 8};
  std::int64_t bias = 0;
  std::vector<std::int64_t> weights;

  std::size_t dims() const { return weights.size(); }

  void validate() const {
    spec.validate();
    if (weights.empty()) throw ConfigError("LR model has no weights");
    if (!spec.fits(bias)) throw WidthError("LR bias does not fit the fixed-point spec");
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (!spec.fits(weights[i])) throw WidthError("LR weight " + std::to_string(i) + " does not fit the fixed-point spec");
    if (2 * spec.total_bits + 16 > 62) throw WidthError("LR fixed-point spec too wide for 64-bit accumulation");
  }

  static LrModel from_doubles(FixedPointSpec spec, double bias, const std::vector<double>& w) {
    LrModel m;
    m.spec = spec;
    m.bias = spec.encode(bias);
    for (double v : w) m.weights.push_back(spec.encode(v));
    m.validate();
    return m;
  }
};

// Text model: line 1 "total_bits frac_bits", line 2 bias, then one weight per
// line, all as decimal reals.
inline LrModel read_lr_model(std::istream& is) {
  std::uint32_t total = 0, frac = 0;
  if (!(is >> total >> frac)) throw ParseError("LR model: first line must be 'total_bits frac_bits'");
  FixedPointSpec spec(total, frac);
  double bias = 0;
  if (!(is >> bias)) throw ParseError("LR model: missing bias");
  std::vector<double> w;
  double v = 0;
  while (is >> v) w.push_back(v);
  if (!is.eof()) throw ParseError("LR model: weight " + std::to_string(w.size()) + " is not a number");
  return LrModel::from_doubles(spec, bias, w);
}

inline LrModel read_lr_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_lr_model(f);
}

inline void write_lr_model(std::ostream& os, const LrModel& m) {
  os << m.spec.total_bits << ' ' << m.spec.frac_bits << '\n';
  char buf[64];
  auto put = [&](std::int64_t raw) {
    std::snprintf(buf, sizeof buf, "%.10g\n", m.spec.decode(raw));
    os << buf;
  };
  put(m.bias);
  for (auto w : m.weights) put(w);
}

// Real-valued feature rows with optional 0/1 labels.
struct LrSamples {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;  // empty when the CSV has no label column

  std::size_t dims() const { return columns.size(); }
};

inline LrSamples read_lr_samples(std::istream& is) {
  LrSamples s;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("sample CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  const bool labelled = !header.empty() && header.back() == "label";
  s.columns.assign(header.begin(), header.end() - (labelled ? 1 : 0));
  if (s.columns.empty()) throw ParseError("sample CSV: no feature columns");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("sample CSV line " + std::to_string(lineno) + ": '" + cell + "' is not a number");
      }
    }
    if (row.size() != header.size())
      throw ParseError("sample CSV line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
    if (labelled) {
      s.labels.push_back(static_cast<int>(row.back()));
      row.pop_back();
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

inline LrSamples read_lr_samples(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_lr_samples(f);
}

inline void write_lr_samples(std::ostream& os, const LrSamples& s) {
  for (std::size_t i = 0; i < s.columns.size(); ++i) os << (i ? "," : "") << s.columns[i];
  if (!s.labels.empty()) os << ",label";
  os << '\n';
  char buf[32];
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    for (std::size_t i = 0; i < s.rows[r].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.4f", s.rows[r][i]);
      os << (i ? "," : "") << buf;
    }
    if (!s.labels.empty()) os << ',' << s.labels[r];
    os << '\n';
  }
}

// Synthetic standardized features with labels drawn from a planted logistic
// model; a license-free stand-in for the bundled dataset.
inline LrSamples generate_lr_samples(Prg& prg, std::size_t rows, std::size_t dims) {
  if (rows == 0 || dims == 0) throw ConfigError("lr-samples: rows and dims must be positive");
  auto gauss = [&] {
    // Box-Muller on the PRG keeps the stream platform-independent.
    const double u1 = (static_cast<double>(prg.next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = prg.uniform_real();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  std::vector<double> planted(dims);
  for (auto& w : planted) w = gauss() / std::sqrt(static_cast<double>(dims)) * 3.0;
  LrSamples s;
  for (std::size_t i = 0; i < dims; ++i) s.columns.push_back("f" + std::to_string(i));
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> x(dims);
    double z = 0;
    for (std::size_t i = 0; i < dims; ++i) {
      x[i] = std::round(gauss() * 1e4) / 1e4;
      z += x[i] * planted[i];
    }
    s.labels.push_back(prg.uniform_real() < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0);
    s.rows.push_back(std::move(x));
  }
  return s;
}

inline std::vector<std::int64_t> quantize_row(const FixedPointSpec& spec, const std::vector<double>& row) {
  std::vector<std::int64_t> raw;
  raw.reserve(row.size());
  for (double v : row) raw.push_back(spec.encode(v));
  return raw;
}

// Sigmoid sampled at the left edge of 2^range_bits equal cells covering
// [z_min, z_max). Entries are raw values in `out`.
struct SigmoidTable {
  FixedPointSpec out{64, 62};
  std::uint32_t range_bits = 12;
  double z_min = -8;
  double z_max = 8;
  std::vector<std::int64_t> entries;

  std::size_t size() const { return entries.size(); }
  double step() const { return (z_max - z_min) / static_cast<double>(entries.size()); }
  double z_at(std::size_t i) const { return z_min + step() * static_cast<double>(i); }
  double value(std::size_t i) const { return out.decode(entries.at(i)); }
};

inline SigmoidTable build_sigmoid_table(FixedPointSpec out = {64, 62}, std::uint32_t range_bits = 12, double z_min = -8,
                                        double z_max = 8) {
  out.validate();
  if (range_bits < 1 || range_bits > 20) throw ConfigError("sigmoid range_bits must be in [1, 20]");
  if (!(z_min < z_max) || !std::isfinite(z_min) || !std::isfinite(z_max))
    throw ConfigError("sigmoid range [z_min, z_max) is degenerate");
  // 1.0 must be representable.
  if (out.frac_bits + 1 >= out.total_bits) throw WidthError("sigmoid output spec cannot represent 1.0");
  SigmoidTable t;
  t.out = out;
  t.range_bits = range_bits;
  t.z_min = z_min;
  t.z_max = z_max;
  const std::size_t n = std::size_t{1} << range_bits;
  t.entries.resize(n);
  const long double scale = std::ldexp(1.0L, static_cast<int>(out.frac_bits));
  for (std::size_t i = 0; i < n; ++i) {
    const long double z = static_cast<long double>(z_min) +
                          (static_cast<long double>(z_max) - z_min) * static_cast<long double>(i) / static_cast<long double>(n);
    t.entries[i] = static_cast<std::int64_t>(::llroundl(scale / (1.0L + ::expl(-z))));
  }
  return t;
}

// How the accumulator (2 * frac_bits fractional bits) maps onto table cells:
// index = clamp(acc - z_min, 0, range) >> shift, exact in integers.
struct LrIndexing {
  std::int64_t z_min_raw = 0;  // z_min scaled to the accumulator
  std::uint32_t range_log2 = 0;  // (z_max - z_min) scaled is 2^range_log2
  std::uint32_t shift = 0;     // range_log2 - range_bits

  LrIndexing(const LrModel& m, const SigmoidTable& t) {
    const int acc_frac = 2 * static_cast<int>(m.spec.frac_bits);
    const double zr = std::ldexp(t.z_min, acc_frac);
    const double width = std::ldexp(t.z_max - t.z_min, acc_frac);
    int e = 0;
    const double mant = std::frexp(width, &e);
    if (zr != std::nearbyint(zr) || mant != 0.5 || e - 1 < static_cast<int>(t.range_bits))
      throw ConfigError("sigmoid range must align with the accumulator grid: (z_max - z_min) * 2^" + std::to_string(acc_frac) +
                        " must be a power of two of at least 2^range_bits, z_min a multiple of 2^-" + std::to_string(acc_frac));
    z_min_raw = static_cast<std::int64_t>(zr);
    range_log2 = static_cast<std::uint32_t>(e - 1);
    shift = range_log2 - t.range_bits;
  }

  std::size_t index(std::int64_t acc, std::size_t table_size) const {
    const std::int64_t u = acc - z_min_raw;
    if (u < 0) return 0;
    if (u >= (std::int64_t{1} << range_log2)) return table_size - 1;
    return static_cast<std::size_t>(u >> shift);
  }
};

// X.W + b with 2 * frac_bits fractional bits, exact.
inline std::int64_t lr_accumulate(const LrModel& m, const std::vector<std::int64_t>& x) {
  if (x.size() != m.dims())
    throw ConfigError("LR input has " + std::to_string(x.size()) + " features, model expects " + std::to_string(m.dims()));
  std::int64_t acc = m.bias * (std::int64_t{1} << m.spec.frac_bits);
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * m.weights[i];
  return acc;
}

// Fixed-point probability through the same table the circuit uses.
inline std::int64_t lr_predict_plain(const LrModel& m, const SigmoidTable& t, const std::vector<std::int64_t>& x) {
  return t.entries[LrIndexing(m, t).index(lr_accumulate(m, x), t.size())];
}

// Full-precision sigmoid of the model applied to real-valued features.
inline double lr_predict_float(const LrModel& m, const std::vector<double>& x) {
  if (x.size() != m.dims()) throw ConfigError("LR input dimension mismatch");
  double z = m.spec.decode(m.bias);
  for (std::size_t i = 0; i < x.size(); ++i) z += x[i] * m.spec.decode(m.weights[i]);
  return 1.0 / (1.0 + std::exp(-z));
}

inline std::uint32_t lr_accumulator_bits(const LrModel& m) {
  std::uint32_t lg = 0;
  while ((std::size_t{1} << lg) < m.dims() + 1) ++lg;
  return 2 * m.spec.total_bits + lg;
}

// z = X.W + b in widened fixed point, cell index by offset/clamp/shift, then a
// multiplexer-tree lookup over constant-wire table entries. Weights, bias and
// table are constant wires shared by all rows; the range bounds are public.
// One row uses groups "x" and "p"; several rows use "x<r>" and "p<r>".
inline circuit::Circuit build_lr_circuit(const LrModel& m, const SigmoidTable& t, std::uint32_t rows = 1) {
  namespace ar = circuit::arith;
  using circuit::Bit;
  using circuit::Bits;
  m.validate();
  if (rows < 1 || rows > 4096) throw ConfigError("LR circuit row count must be in [1, 4096]");
  const LrIndexing ix(m, t);
  const std::uint32_t tb = m.spec.total_bits, fb = m.spec.frac_bits;
  const std::uint32_t acc_bits = lr_accumulator_bits(m);
  if (ix.range_log2 + 1 > 62) throw WidthError("sigmoid range too wide for the accumulator");
  auto name = [rows](const char* base, std::uint32_t r) { return rows == 1 ? std::string(base) : base + std::to_string(r); };

  circuit::CircuitBuilder cb;
  std::vector<Bits> xs;
  for (std::uint32_t r = 0; r < rows; ++r) xs.push_back(cb.input(name("x", r), 0, static_cast<std::uint32_t>(m.dims() * tb)));
  circuit::BitVector wv;
  for (auto w : m.weights) circuit::append_bits(wv, m.spec.to_pattern(w), tb);
  const Bits w = cb.constant("weights", wv);
  const Bits b = cb.constant("bias", m.spec.to_pattern(m.bias), tb);
  circuit::BitVector tv;
  for (auto e : t.entries) circuit::append_bits(tv, t.out.to_pattern(e), t.out.total_bits);
  const Bits table = cb.constant("table", tv);

  auto slice = [](const Bits& v, std::size_t i, std::size_t w) {
    return Bits(v.begin() + static_cast<std::ptrdiff_t>(i * w), v.begin() + static_cast<std::ptrdiff_t>((i + 1) * w));
  };
  const std::size_t uw = std::max<std::size_t>(acc_bits, ix.range_log2 + 1) + 1;
  const auto zm = static_cast<std::uint64_t>(ix.z_min_raw);
  Bits zmin(uw);
  for (std::size_t i = 0; i < uw; ++i) zmin[i] = Bit::literal(((i < 64 ? zm >> i : zm >> 63) & 1u) != 0);

  for (std::uint32_t r = 0; r < rows; ++r) {
    std::vector<Bits> terms;
    for (std::size_t i = 0; i < m.dims(); ++i) terms.push_back(ar::mul_signed(cb, slice(xs[r], i, tb), slice(w, i, tb)));
    terms.push_back(ar::shift_left(b, fb));
    // Signed adder tree; every level widens by one bit.
    while (terms.size() > 1) {
      std::vector<Bits> next;
      for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(ar::add_signed(cb, terms[i], terms[i + 1]));
      if (terms.size() % 2) next.push_back(terms.back());
      terms = std::move(next);
    }
    Bits acc = ar::sign_extend(terms.front(), acc_bits);

    // u = acc - z_min in one extra bit, so its sign is exact.
    const Bits u = ar::sub(cb, ar::sign_extend(acc, uw), zmin, uw);
    const Bit neg = u.back();
    const Bit high = ar::any(cb, Bits(u.begin() + ix.range_log2, u.end() - 1));
    const Bit over = cb.AND(high, cb.NOT(neg));
    Bits index(t.range_bits);
    for (std::uint32_t i = 0; i < t.range_bits; ++i) index[i] = cb.AND(cb.OR(u[ix.shift + i], over), cb.NOT(neg));

    std::vector<Bits> entries(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) entries[i] = slice(table, i, t.out.total_bits);
    cb.output(name("p", r), ar::lookup(cb, index, std::move(entries)));
  }
  return cb.build();
}

inline circuit::BitVector lr_input_bits(const LrModel& m, const std::vector<std::int64_t>& x) {
  if (x.size() != m.dims()) throw ConfigError("LR input dimension mismatch");
  circuit::BitVector bits;
  for (auto v : x) {
    if (!m.spec.fits(v)) throw WidthError("LR feature does not fit the fixed-point spec");
    circuit::append_bits(bits, m.spec.to_pattern(v), m.spec.total_bits);
  }
  return bits;
}

// Probability of row `row` from the concatenated circuit outputs.
inline std::int64_t lr_decode_output(const SigmoidTable& t, const circuit::BitVector& out, std::size_t row = 0) {
  if (out.size() < (row + 1) * t.out.total_bits) throw ConfigError("LR output too short for row " + std::to_string(row));
  return t.out.from_pattern(circuit::from_bits(out, row * t.out.total_bits, t.out.total_bits));
}

}  // namespace dmpc::analytics
