#include <gtest/gtest.h>

#include <random>

#include "dmpc/common/aes.hpp"
#include "dmpc/common/bytes.hpp"
#include "dmpc/common/prg.hpp"
#include "dmpc/common/sha256.hpp"

using namespace dmpc;

namespace {
Block from_hex(const char* hex) {
  std::array<std::uint8_t, 16> b{};
  for (int i = 0; i < 16; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::stoi(std::string(hex + 2 * i, 2), nullptr, 16));
  return Block::from_le_bytes(b);
}
}  // namespace

TEST(Aes, Fips197Vector) {
  const Block key = from_hex("000102030405060708090a0b0c0d0e0f");
  const Block pt = from_hex("00112233445566778899aabbccddeeff");
  const Block ct = from_hex("69c4e0d86a7b0430d8cdb78070b4c55a");
  EXPECT_EQ(Aes128(key).encrypt(pt), ct);
  EXPECT_EQ(aes128_reference(key, pt), ct);
}

TEST(Aes, BatchMatchesReference) {
  std::mt19937_64 rng(1);
  const Block key{rng(), rng()};
  Aes128 aes(key);
  std::vector<Block> in(37), out(37);
  for (auto& b : in) b = Block{rng(), rng()};
  aes.encrypt_n(in.data(), out.data(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(out[i], aes128_reference(key, in[i]));
}

TEST(Block, Doubling) {
  EXPECT_EQ((Block{1, 0}).doubled(), (Block{2, 0}));
  EXPECT_EQ((Block{0, 1ULL << 63}).doubled(), (Block{0x87, 0}));
  EXPECT_EQ((Block{1ULL << 63, 0}).doubled(), (Block{0, 1}));
}

TEST(Bytes, RoundTrip) {
  ByteWriter w;
  w.u8(7);
  w.u16(0x1234);
  w.u32(0xdeadbeef);
  w.u64(0x0102030405060708ULL);
  w.str("hello");
  write_block(w, Block{5, 6});
  auto bytes = w.take();
  EXPECT_EQ(bytes[1], 0x12);
  ByteReader r(bytes);
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u16(), 0x1234);
  EXPECT_EQ(r.u32(), 0xdeadbeefu);
  EXPECT_EQ(r.u64(), 0x0102030405060708ULL);
  EXPECT_EQ(r.str(), "hello");
  EXPECT_EQ(read_block(r), (Block{5, 6}));
  EXPECT_TRUE(r.done());
  EXPECT_THROW(r.u8(), ParseError);
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(to_hex(sha256("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Prg, DeterministicAndUniformBounds) {
  Prg a(42, 1), b(42, 1), c(42, 2);
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  for (int i = 0; i < 1000; ++i) {
    auto v = a.uniform_int(-3, 5);
    EXPECT_GE(v, -3);
    EXPECT_LE(v, 5);
  }
}
