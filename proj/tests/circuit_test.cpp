#include <gtest/gtest.h>

#include <random>

#include "dmpc/circuit/builders.hpp"
#include "dmpc/circuit/eval.hpp"
#include "dmpc/circuit/fixed_point.hpp"
#include "dmpc/circuit/text_format.hpp"

using namespace dmpc;
using namespace dmpc::circuit;

namespace {

std::uint64_t mask(std::uint32_t n) { return n >= 64 ? ~0ULL : (1ULL << n) - 1; }

std::uint64_t run2(const Circuit& c, std::uint64_t a, std::uint64_t b, std::uint32_t n) {
  BitVector in;
  append_bits(in, a, n);
  append_bits(in, b, n);
  return from_bits(eval_plain(c, in));
}

}  // namespace

TEST(Adder, SmallSums) {
  auto c = build_adder(8);
  EXPECT_EQ(run2(c, 1, 1, 8), 2u);
  EXPECT_EQ(run2(c, 255, 1, 8), 0u);
  EXPECT_EQ(c.stats().non_xor, 7u);
  EXPECT_EQ(c.n_inputs(), 16u);
  EXPECT_EQ(c.n_outputs(), 8u);
}

TEST(Adder, RandomMatchesNative) {
  std::mt19937_64 rng(1);
  for (std::uint32_t n : {1u, 7u, 16u, 33u, 64u}) {
    auto c = build_adder(n);
    EXPECT_EQ(c.stats().non_xor, n - 1);
    for (int i = 0; i < 1000; ++i) {
      const std::uint64_t a = rng() & mask(n), b = rng() & mask(n);
      ASSERT_EQ(run2(c, a, b, n), (a + b) & mask(n)) << n << ": " << a << "+" << b;
    }
  }
}

TEST(Adder, WidthRange) {
  EXPECT_THROW(build_adder(0), WidthError);
  EXPECT_THROW(build_adder(65), WidthError);
}

TEST(Multiplier, SmallProducts) {
  auto c = build_multiplier(8);
  EXPECT_EQ(run2(c, 3, 5, 8), 15u);
  EXPECT_EQ(run2(c, 0, 200, 8), 0u);
  EXPECT_EQ(run2(c, 255, 255, 8), 65025u);
  EXPECT_EQ(c.n_outputs(), 16u);
}

TEST(Multiplier, RandomMatchesNative) {
  std::mt19937_64 rng(2);
  for (std::uint32_t n : {1u, 5u, 16u, 32u}) {
    auto c = build_multiplier(n);
    for (int i = 0; i < 1000; ++i) {
      const std::uint64_t a = rng() & mask(n), b = rng() & mask(n);
      ASSERT_EQ(run2(c, a, b, n), a * b) << a << "*" << b;
    }
  }
  EXPECT_THROW(build_multiplier(33), WidthError);
}

TEST(GreaterThan, Basics) {
  auto c = build_greater_than(8);
  EXPECT_EQ(run2(c, 5, 3, 8), 1u);
  EXPECT_EQ(run2(c, 7, 7, 8), 0u);
  EXPECT_EQ(run2(c, 3, 5, 8), 0u);
  EXPECT_EQ(c.stats().non_xor, 8u);
}

TEST(GreaterThan, RandomMatchesNative) {
  std::mt19937_64 rng(3);
  auto c = build_greater_than(64);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t a = rng(), b = rng();
    if (i % 10 == 0) b = a;
    if (i % 10 == 1) b = a ^ 1;
    ASSERT_EQ(run2(c, a, b, 64), a > b ? 1u : 0u);
  }
  auto wide = build_greater_than(128);
  for (int i = 0; i < 200; ++i) {
    const unsigned __int128 a = (static_cast<unsigned __int128>(rng()) << 64) | rng();
    const unsigned __int128 b = (i % 2) ? a - (rng() % 3) : (static_cast<unsigned __int128>(rng()) << 64) | rng();
    BitVector in;
    append_bits(in, static_cast<std::uint64_t>(a), 64);
    append_bits(in, static_cast<std::uint64_t>(a >> 64), 64);
    append_bits(in, static_cast<std::uint64_t>(b), 64);
    append_bits(in, static_cast<std::uint64_t>(b >> 64), 64);
    ASSERT_EQ(eval_plain(wide, in).at(0), a > b ? 1 : 0);
  }
  EXPECT_THROW(build_greater_than(129), WidthError);
}

TEST(Lookup, DirectIndexing) {
  auto c = build_lookup({7, 0, 3, 9}, 2, 4);
  EXPECT_EQ(from_bits(eval_plain(c, to_bits(2, 2))), 3u);
  EXPECT_EQ(from_bits(eval_plain(c, to_bits(3, 2))), 9u);
}

TEST(Lookup, ExhaustiveSweeps) {
  std::mt19937_64 rng(4);
  for (std::uint32_t k : {1u, 4u, 10u}) {
    std::vector<std::uint64_t> table(1u << k);
    for (auto& v : table) v = rng() & mask(13);
    auto c = build_lookup(table, k, 13);
    EXPECT_EQ(c.stats().non_xor, 13u * (table.size() - 1));
    for (std::uint64_t i = 0; i < table.size(); ++i) ASSERT_EQ(from_bits(eval_plain(c, to_bits(i, k))), table[i]);
  }
}

TEST(Lookup, Twelve) {
  std::vector<std::uint64_t> table(4096);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = (i * 2654435761u) & 0xff;
  auto c = build_lookup(table, 12, 8);
  for (std::uint64_t i = 0; i < table.size(); ++i) ASSERT_EQ(from_bits(eval_plain(c, to_bits(i, 12))), table[i]);
}

TEST(Lookup, CostDoublesPerIndexBit) {
  std::uint64_t prev = 0;
  for (std::uint32_t k = 10; k <= 12; ++k) {
    auto c = build_lookup(std::vector<std::uint64_t>(1u << k, 1), k, 9);
    const auto n = c.stats().non_xor;
    if (prev) {
      const double r = static_cast<double>(n) / static_cast<double>(prev);
      EXPECT_GT(r, 1.9);
      EXPECT_LT(r, 2.1);
    }
    prev = n;
  }
}

TEST(Lookup, Errors) {
  EXPECT_THROW(build_lookup({1, 2, 3}, 2, 4), ConfigError);
  EXPECT_THROW(build_lookup({1, 2, 3, 16}, 2, 4), WidthError);
}

TEST(Builder, LiteralFoldingAndDce) {
  CircuitBuilder cb;
  auto a = cb.input("a", 0, 2);
  auto unused = cb.AND(a[0], a[1]);
  (void)unused;
  auto x = cb.XOR(a[0], a[0]);
  EXPECT_TRUE(x.is_literal());
  EXPECT_EQ(cb.AND(a[0], Bit::literal(true)), a[0]);
  EXPECT_EQ(cb.NOT(cb.NOT(a[1])), a[1]);
  cb.output("o", {cb.XOR(a[0], a[1]), x, Bit::literal(true)});
  auto c = cb.build();
  EXPECT_EQ(c.stats().non_xor, 0u);
  EXPECT_EQ(c.stats().total, 1u);
  for (int v = 0; v < 4; ++v) {
    auto out = eval_plain(c, to_bits(static_cast<std::uint64_t>(v), 2));
    EXPECT_EQ(out, (BitVector{static_cast<std::uint8_t>((v & 1) ^ (v >> 1)), 0, 1}));
  }
}

TEST(Builder, XorOnlySelfInverse) {
  CircuitBuilder cb;
  auto a = cb.input("a", 0, 8);
  auto b = cb.input("b", 1, 8);
  Bits o(8);
  for (int i = 0; i < 8; ++i) o[i] = cb.XOR(a[i], b[i]);
  cb.output("o", o);
  auto c = cb.build();
  EXPECT_EQ(c.stats().non_xor, 0u);
  for (std::uint64_t v = 0; v < 256; ++v) EXPECT_EQ(run2(c, v, v, 8), 0u);
}

TEST(Builder, Deterministic) {
  EXPECT_EQ(write_text(build_multiplier(12)), write_text(build_multiplier(12)));
  EXPECT_EQ(structure_hash(build_adder(32)), structure_hash(build_adder(32)));
  EXPECT_NE(structure_hash(build_adder(32)), structure_hash(build_adder(31)));
}

TEST(Arith, SignedOpsMatchNative) {
  std::mt19937_64 rng(5);
  CircuitBuilder cb;
  auto x = cb.input("x", 0, 12);
  auto y = cb.input("y", 1, 9);
  cb.output("prod", arith::mul_signed(cb, x, y));
  cb.output("sum", arith::add_signed(cb, x, y));
  cb.output("diff", arith::sub_signed(cb, x, y));
  cb.output("abs", arith::abs_value(cb, x));
  cb.output("shr", arith::shift_right(x, 3));
  auto c = cb.build();
  FixedPointSpec s21(21, 0), s13(13, 0), s12(12, 0), s9(9, 0);
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t a = static_cast<std::int64_t>(rng() % 4096) - 2048;
    const std::int64_t b = static_cast<std::int64_t>(rng() % 512) - 256;
    BitVector in;
    append_bits(in, s12.to_pattern(a), 12);
    append_bits(in, s9.to_pattern(b), 9);
    auto out = eval_plain(c, in);
    ASSERT_EQ(s21.from_pattern(from_bits(out, 0, 21)), a * b);
    ASSERT_EQ(s13.from_pattern(from_bits(out, 21, 13)), a + b);
    ASSERT_EQ(s13.from_pattern(from_bits(out, 34, 13)), a - b);
    ASSERT_EQ(from_bits(out, 47, 12), static_cast<std::uint64_t>(a < 0 ? -a : a) & 0xfff);
    ASSERT_EQ(FixedPointSpec(9, 0).from_pattern(from_bits(out, 59, 9)), a >> 3);
  }
}

TEST(Eval, LengthMismatch) {
  auto c = build_adder(8);
  EXPECT_THROW(eval_plain(c, BitVector(15)), ConfigError);
}

TEST(Circuit, RejectsNonTopological) {
  std::vector<PartyGroup> p{{"a", 0, 2}};
  EXPECT_THROW(Circuit(p, {}, {Gate{GateKind::And, 0, 3, 2}}, {}), ConfigError);
  EXPECT_THROW(Circuit(p, {}, {Gate{GateKind::And, 0, 1, 5}}, {}), ConfigError);
}

TEST(TextFormat, RoundTrip) {
  for (const auto& c : {build_adder(8), build_multiplier(6), build_lookup({7, 0, 3, 9}, 2, 4)}) {
    auto text = write_text(c);
    auto back = read_text(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(write_text(back), text);
  }
  auto c = build_lookup({7, 0, 3, 9}, 2, 4);
  auto withheld = read_text(write_text(c, false));
  EXPECT_EQ(withheld, c.topology_only());
  EXPECT_EQ(structure_hash(withheld), structure_hash(c));
}

TEST(TextFormat, LineDiagnostics) {
  const std::string bad = "1 3\n1 2\n1 1\nparty a 0 2\noutput o 1 2\n2 1 0 1 2 NAND\n";
  try {
    read_text(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_text("1 3\n1 2\n1 1\nparty a 0 2\noutput o 1 2\n2 1 0 2 2 AND\n"), ParseError);
  EXPECT_THROW(read_text("2 3\n1 2\n1 1\nparty a 0 2\noutput o 1 2\n2 1 0 1 2 AND\n"), ParseError);
  EXPECT_THROW(read_text(""), ParseError);
}

TEST(FixedPoint, Spec) {
  EXPECT_THROW(FixedPointSpec(16, 16), ConfigError);
  EXPECT_THROW(FixedPointSpec(65, 0), ConfigError);
  FixedPointSpec s(16, 8);
  EXPECT_EQ(s.encode(1.5), 384);
  EXPECT_EQ(s.encode(-0.25), -64);
  EXPECT_THROW(s.encode(128.0), WidthError);
  EXPECT_EQ(s.from_pattern(s.to_pattern(-300)), -300);
  EXPECT_DOUBLE_EQ(s.decode(-64), -0.25);
}
