#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dmpc/circuit/builders.hpp"
#include "dmpc/circuit/eval.hpp"
#include "dmpc/gc/garble.hpp"
#include "random_circuit.hpp"

using namespace dmpc;
using namespace dmpc::gc;
using circuit::append_bits;
using circuit::from_bits;

namespace {

struct Session {
  GlobalDelta delta;
  Block key;
  InputLabelPrf prf;
  Prg rng;

  explicit Session(std::uint64_t seed)
      : delta(derive_delta(Block{seed, 7})), key{seed * 31 + 1, 5}, prf(key), rng(seed, 99) {}

  LabelSource source() const {
    return [this](WireId w) { return prf.zero_label(w); };
  }

  BitVector run(const Circuit& c, const BitVector& in, GarbleResult* keep = nullptr) {
    auto g = garble(c, delta, source(), rng);
    auto active = encode_inputs(c, source(), delta, in);
    active.insert(active.end(), g.constant_labels.begin(), g.constant_labels.end());
    auto out = decode(g.decoding, evaluate(g.garbled, c, active));
    if (keep) *keep = std::move(g);
    return out;
  }
};

}  // namespace

TEST(Delta, LsbForcedAndDeterministic) {
  std::mt19937_64 rng(11);
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (int i = 0; i < 1000; ++i) {
    const Block seed{rng(), rng()};
    auto d = derive_delta(seed);
    EXPECT_TRUE(d.value().lsb());
    EXPECT_EQ(d, derive_delta(seed));
    seen.insert({d.value().lo, d.value().hi});
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_THROW(GlobalDelta(Block{2, 0}), ConfigError);
}

TEST(InputLabels, DeterministicAndDistinct) {
  const Block key{0x1234, 0x5678};
  EXPECT_EQ(derive_input_label(key, 0), derive_input_label(key, 0));
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto l = derive_input_label(key, i);
    seen.insert({l.lo, l.hi});
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_input_label(key, 3, 0), derive_input_label(key, 3, 1));
  auto delta = derive_delta(Block{9, 9});
  InputLabelPrf prf(key);
  EXPECT_EQ(prf.label(17, true, delta), derive_input_label(key, 17) ^ delta.value());
}

TEST(Garble, SingleAndTruthTable) {
  circuit::CircuitBuilder cb;
  auto a = cb.input("a", 0, 1);
  auto b = cb.input("b", 1, 1);
  cb.output("o", {cb.AND(a[0], b[0])});
  auto c = cb.build();
  Session s(1);
  for (int v = 0; v < 4; ++v) {
    auto out = s.run(c, BitVector{static_cast<std::uint8_t>(v & 1), static_cast<std::uint8_t>(v >> 1)});
    EXPECT_EQ(out.at(0), v == 3 ? 1 : 0);
  }
}

TEST(Garble, XorOnlyHasNoRows) {
  circuit::CircuitBuilder cb;
  auto a = cb.input("a", 0, 4);
  auto b = cb.input("b", 1, 4);
  circuit::Bits o;
  for (int i = 0; i < 4; ++i) o.push_back(cb.NOT(cb.XOR(a[i], b[i])));
  cb.output("o", o);
  auto c = cb.build();
  Session s(2);
  GarbleResult g;
  s.run(c, BitVector(8, 1), &g);
  EXPECT_TRUE(g.garbled.rows.empty());
  EXPECT_EQ(g.garbled.serialize().size(), GarbledCircuit::kHeaderBytes);
}

TEST(Garble, AdderDecodes) {
  auto c = circuit::build_adder(8);
  Session s(3);
  BitVector in;
  append_bits(in, 1, 8);
  append_bits(in, 1, 8);
  EXPECT_EQ(from_bits(s.run(c, in)), 2u);
}

TEST(Garble, LabelAlgebraOnOutputs) {
  auto c = circuit::build_multiplier(6);
  Session s(4);
  auto g = garble(c, s.delta, s.source(), s.rng);
  // Zero-labels of inputs decode as zeros through the whole circuit only for
  // the zero input; flipping an output label by Δ flips its decoded bit.
  std::vector<WireLabel> zeros;
  for (WireId w = 0; w < c.n_inputs(); ++w) zeros.push_back(s.prf.zero_label(w));
  zeros.insert(zeros.end(), g.constant_labels.begin(), g.constant_labels.end());
  auto out = evaluate(g.garbled, c, zeros);
  auto bits = decode(g.decoding, out);
  EXPECT_EQ(bits, BitVector(12, 0));
  for (auto& l : out) l ^= s.delta.value();
  EXPECT_EQ(decode(g.decoding, out), BitVector(12, 1));
}

TEST(Garble, RandomCircuitsMatchPlain) {
  std::mt19937_64 rng(5);
  int cases = 0;
  for (int ci = 0; ci < 100; ++ci) {
    auto c = random_circuit(rng, 4 + rng() % 20, rng() % 8, 20 + rng() % 200, 1 + rng() % 16);
    Session s(100 + static_cast<std::uint64_t>(ci));
    for (int k = 0; k < 10; ++k, ++cases) {
      BitVector in(c.n_inputs());
      for (auto& b : in) b = static_cast<std::uint8_t>(rng() & 1);
      GarbleResult g;
      ASSERT_EQ(s.run(c, in, &g), circuit::eval_plain(c, in)) << "circuit " << ci;
      ASSERT_EQ(g.garbled.serialize().size(), GarbledCircuit::kHeaderBytes + 32 * c.stats().non_xor);
    }
  }
  EXPECT_EQ(cases, 1000);
}

TEST(Garble, DeterministicUnderFixedSeed) {
  auto c = circuit::build_multiplier(8);
  Session s1(6), s2(6);
  auto g1 = garble(c, s1.delta, s1.source(), s1.rng);
  auto g2 = garble(c, s2.delta, s2.source(), s2.rng);
  EXPECT_EQ(g1.garbled.serialize(), g2.garbled.serialize());
  EXPECT_EQ(g1.decoding, g2.decoding);
}

TEST(Serialization, RoundTripAndErrors) {
  auto c = circuit::build_lookup({5, 1, 7, 2, 0, 3, 3, 6}, 3, 3);
  Session s(7);
  auto g = garble(c, s.delta, s.source(), s.rng);
  auto bytes = g.garbled.serialize();
  EXPECT_EQ(bytes.size(), 48 + 32 * c.stats().non_xor);
  EXPECT_EQ(GarbledCircuit::parse(bytes), g.garbled);
  EXPECT_EQ(DecodingInfo::parse(g.decoding.serialize()), g.decoding);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(GarbledCircuit::parse(truncated), ParseError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(GarbledCircuit::parse(bad), ParseError);
}

TEST(Evaluate, Mismatches) {
  auto c = circuit::build_adder(8);
  Session s(8);
  auto g = garble(c, s.delta, s.source(), s.rng);
  EXPECT_THROW(evaluate(g.garbled, c, std::vector<WireLabel>(3)), ConfigError);
  auto other = circuit::build_adder(9);
  EXPECT_THROW(evaluate(g.garbled, other, std::vector<WireLabel>(other.n_input_wires())), ProtocolError);
  EXPECT_THROW(decode(g.decoding, std::vector<WireLabel>(2)), ConfigError);
}
