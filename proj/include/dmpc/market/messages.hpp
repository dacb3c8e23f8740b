#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/common/block.hpp"
#include "dmpc/common/bytes.hpp"
#include "dmpc/common/errors.hpp"

namespace dmpc::market {

enum class RoleKind : std::uint8_t { Csp = 1, DataTrust = 2, Maker = 3, Buyer = 4, Broadcast = 0xFF };

// Role kind in the top byte, index in the low 24 bits.
struct PartyId {
  RoleKind kind = RoleKind::Csp;
  std::uint32_t index = 0;

  static PartyId csp() { return {RoleKind::Csp, 0}; }
  static PartyId datatrust() { return {RoleKind::DataTrust, 0}; }
  static PartyId maker(std::uint32_t i) { return {RoleKind::Maker, i}; }
  static PartyId buyer(std::uint32_t j = 0) { return {RoleKind::Buyer, j}; }
  // Public announcement to every maker and buyer.
  static PartyId broadcast() { return {RoleKind::Broadcast, 0}; }

  std::uint32_t pack() const { return (static_cast<std::uint32_t>(kind) << 24) | (index & 0xFFFFFFu); }
  static PartyId unpack(std::uint32_t v) {
    const auto k = static_cast<std::uint8_t>(v >> 24);
    if (k != 1 && k != 2 && k != 3 && k != 4 && k != 0xFF) throw ParseError("frame: unknown party kind " + std::to_string(k));
    return {static_cast<RoleKind>(k), v & 0xFFFFFFu};
  }

  std::string str() const {
    switch (kind) {
      case RoleKind::Csp: return "csp";
      case RoleKind::DataTrust: return "datatrust";
      case RoleKind::Maker: return "maker" + std::to_string(index);
      case RoleKind::Buyer: return "buyer" + std::to_string(index);
      case RoleKind::Broadcast: return "broadcast";
    }
    return "?";
  }

  bool operator==(const PartyId&) const = default;
  bool operator<(const PartyId& o) const { return pack() < o.pack(); }
};

enum class MsgType : std::uint8_t {
  PublicKeyDist = 1,
  EncryptedListing = 2,
  Query = 3,
  ListingBundle = 4,
  DecryptRequest = 5,
  Result = 6,
  DeltaKeyDist = 7,
  InputLabels = 8,
  GarbledCircuitMsg = 9,
  OutputLabels = 10,
  OutputDecoding = 11,
  Abort = 0x7F,
};

inline const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::PublicKeyDist: return "PublicKeyDist";
    case MsgType::EncryptedListing: return "EncryptedListing";
    case MsgType::Query: return "Query";
    case MsgType::ListingBundle: return "ListingBundle";
    case MsgType::DecryptRequest: return "DecryptRequest";
    case MsgType::Result: return "Result";
    case MsgType::DeltaKeyDist: return "DeltaKeyDist";
    case MsgType::InputLabels: return "InputLabels";
    case MsgType::GarbledCircuitMsg: return "GarbledCircuitMsg";
    case MsgType::OutputLabels: return "OutputLabels";
    case MsgType::OutputDecoding: return "OutputDecoding";
    case MsgType::Abort: return "Abort";
  }
  return "?";
}

inline MsgType msg_type_from(std::uint8_t v) {
  if ((v >= 1 && v <= 11) || v == 0x7F) return static_cast<MsgType>(v);
  throw ParseError("frame: unknown message type " + std::to_string(v));
}

// Wire frame: u32 BE length of everything after it, then type, session,
// sequence number, sender, receiver, a 16-byte session-key slot (zero: the
// channel is assumed secure at desk scale) and the payload.
struct Frame {
  static constexpr std::size_t kLengthBytes = 4;
  static constexpr std::size_t kHeaderBytes = 1 + 8 + 8 + 4 + 4 + 16;
  static constexpr std::size_t kSeqOffset = kLengthBytes + 1 + 8;
  static constexpr std::uint32_t kMaxBody = 1u << 30;

  MsgType type = MsgType::Abort;
  std::uint64_t session = 0;
  std::uint64_t seq = 0;
  PartyId from;
  PartyId to;
  std::array<std::uint8_t, 16> key_slot{};
  Bytes payload;

  std::size_t wire_size() const { return kLengthBytes + kHeaderBytes + payload.size(); }

  Bytes encode() const {
    if (kHeaderBytes + payload.size() > kMaxBody) throw TransportError("frame payload too large");
    ByteWriter w;
    w.reserve(wire_size());
    w.u32(static_cast<std::uint32_t>(kHeaderBytes + payload.size()));
    w.u8(static_cast<std::uint8_t>(type));
    w.u64(session);
    w.u64(seq);
    w.u32(from.pack());
    w.u32(to.pack());
    w.raw(key_slot);
    w.raw(payload);
    return w.take();
  }

  // Parses exactly one frame occupying all of `bytes`.
  static Frame decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kLengthBytes + kHeaderBytes) throw ParseError("frame: truncated header");
    ByteReader r(bytes);
    const auto len = r.u32();
    if (len < kHeaderBytes || len > kMaxBody) throw ParseError("frame: bad length " + std::to_string(len));
    if (bytes.size() != kLengthBytes + len)
      throw ParseError("frame: length field says " + std::to_string(len) + " bytes, have " + std::to_string(bytes.size() - kLengthBytes));
    Frame f;
    f.type = msg_type_from(r.u8());
    f.session = r.u64();
    f.seq = r.u64();
    f.from = PartyId::unpack(r.u32());
    f.to = PartyId::unpack(r.u32());
    auto ks = r.raw(16);
    std::copy(ks.begin(), ks.end(), f.key_slot.begin());
    auto rest = r.raw(r.remaining());
    f.payload.assign(rest.begin(), rest.end());
    return f;
  }

  // Overwrites the sequence number of an encoded frame in place.
  static void stamp_seq(Bytes& encoded, std::uint64_t seq) {
    if (encoded.size() < kSeqOffset + 8) throw ParseError("frame: too short to stamp");
    for (int i = 0; i < 8; ++i) encoded[kSeqOffset + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(seq >> (56 - 8 * i));
  }
};

// ---- payloads --------------------------------------------------------------

struct PublicKeyDistMsg {
  Bytes public_key;
  Bytes relin_key;
  Bytes encode() const {
    ByteWriter w;
    w.blob(public_key);
    w.blob(relin_key);
    return w.take();
  }
  static PublicKeyDistMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    PublicKeyDistMsg m{r.blob(), r.blob()};
    r.expect_done("PublicKeyDist");
    return m;
  }
};

struct EncryptedListingMsg {
  std::uint32_t maker = 0;
  Bytes listing;
  Bytes encode() const {
    ByteWriter w;
    w.u32(maker);
    w.blob(listing);
    return w.take();
  }
  static EncryptedListingMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    EncryptedListingMsg m;
    m.maker = r.u32();
    m.listing = r.blob();
    r.expect_done("EncryptedListing");
    return m;
  }
};

// A registered computation id plus its public parameters (key=value text).
struct QueryMsg {
  std::uint32_t buyer = 0;
  std::string computation;
  std::string params;
  Bytes encode() const {
    ByteWriter w;
    w.u32(buyer);
    w.str(computation);
    w.str(params);
    return w.take();
  }
  static QueryMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    QueryMsg m;
    m.buyer = r.u32();
    m.computation = r.str();
    m.params = r.str();
    r.expect_done("Query");
    return m;
  }
};

enum class BundleKind : std::uint8_t { Ciphertexts = 1, Labels = 2 };

struct ListingBundleMsg {
  BundleKind kind = BundleKind::Ciphertexts;
  std::vector<std::pair<std::uint32_t, Bytes>> entries;  // (maker, listing or label blob)
  Bytes encode() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [m, b] : entries) {
      w.u32(m);
      w.blob(b);
    }
    return w.take();
  }
  static ListingBundleMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    ListingBundleMsg m;
    const auto k = r.u8();
    if (k != 1 && k != 2) throw ParseError("ListingBundle: unknown kind");
    m.kind = static_cast<BundleKind>(k);
    const auto n = r.u32();
    if (n > 1u << 16) throw ParseError("ListingBundle: too many entries");
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto maker = r.u32();
      m.entries.emplace_back(maker, r.blob());
    }
    r.expect_done("ListingBundle");
    return m;
  }
};

struct DecryptRequestMsg {
  Bytes result;  // encrypted result listing
  Bytes encode() const {
    ByteWriter w;
    w.blob(result);
    return w.take();
  }
  static DecryptRequestMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    DecryptRequestMsg m{r.blob()};
    r.expect_done("DecryptRequest");
    return m;
  }
};

// Final per-instance values: LD decisions (0/1) or LR probabilities (raw).
struct ResultMsg {
  std::vector<std::int64_t> values;
  Bytes encode() const {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(values.size()));
    for (auto v : values) w.u64(static_cast<std::uint64_t>(v));
    return w.take();
  }
  static ResultMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    ResultMsg m;
    const auto n = r.u32();
    if (n > r.remaining() / 8) throw ParseError("Result: count exceeds payload");
    for (std::uint32_t i = 0; i < n; ++i) m.values.push_back(static_cast<std::int64_t>(r.u64()));
    r.expect_done("Result");
    return m;
  }
};

struct DeltaKeyDistMsg {
  Block delta;
  Block prf_key;
  Bytes encode() const {
    ByteWriter w;
    write_block(w, delta);
    write_block(w, prf_key);
    return w.take();
  }
  static DeltaKeyDistMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    DeltaKeyDistMsg m;
    m.delta = read_block(r);
    m.prf_key = read_block(r);
    r.expect_done("DeltaKeyDist");
    return m;
  }
};

inline void write_blocks(ByteWriter& w, const std::vector<Block>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  w.reserve(16 * v.size());
  for (const auto& b : v) write_block(w, b);
}

inline std::vector<Block> read_blocks(ByteReader& r) {
  const auto n = r.u32();
  if (n > r.remaining() / 16) throw ParseError("label count exceeds payload");
  std::vector<Block> v(n);
  for (auto& b : v) b = read_block(r);
  return v;
}

struct InputLabelsMsg {
  std::uint32_t maker = 0;
  std::vector<Block> labels;  // active labels of the maker's wires, in wire order
  Bytes encode() const {
    ByteWriter w;
    w.u32(maker);
    write_blocks(w, labels);
    return w.take();
  }
  static InputLabelsMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    InputLabelsMsg m;
    m.maker = r.u32();
    m.labels = read_blocks(r);
    r.expect_done("InputLabels");
    return m;
  }
};

struct GarbledCircuitMsgBody {
  Bytes garbled;
  std::vector<Block> constant_labels;
  Bytes encode() const {
    ByteWriter w;
    w.blob(garbled);
    write_blocks(w, constant_labels);
    return w.take();
  }
  static GarbledCircuitMsgBody decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    GarbledCircuitMsgBody m;
    m.garbled = r.blob();
    m.constant_labels = read_blocks(r);
    r.expect_done("GarbledCircuitMsg");
    return m;
  }
};

struct OutputLabelsMsg {
  std::vector<Block> labels;
  Bytes encode() const {
    ByteWriter w;
    write_blocks(w, labels);
    return w.take();
  }
  static OutputLabelsMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    OutputLabelsMsg m;
    m.labels = read_blocks(r);
    r.expect_done("OutputLabels");
    return m;
  }
};

struct OutputDecodingMsg {
  std::vector<std::uint8_t> bits;
  Bytes encode() const {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(bits.size()));
    Bytes packed((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    w.raw(packed);
    return w.take();
  }
  static OutputDecodingMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    OutputDecodingMsg m;
    const auto n = r.u32();
    auto packed = r.raw((static_cast<std::size_t>(n) + 7) / 8);
    for (std::uint32_t i = 0; i < n; ++i) m.bits.push_back((packed[i / 8] >> (i % 8)) & 1u);
    r.expect_done("OutputDecoding");
    return m;
  }
};

// Error category carried by Abort so the receiving side can rethrow the same
// exception type the failing role raised.
enum class AbortCode : std::uint8_t { Generic = 0, Config = 1, Width = 2, Parse = 3, Decryption = 4, Budget = 5, Protocol = 6, Transport = 7, Undefined = 8 };

struct AbortMsg {
  AbortCode code = AbortCode::Generic;
  std::string reason;

  Bytes encode() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(code));
    w.str(reason);
    return w.take();
  }
  static AbortMsg decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    AbortMsg m;
    const auto c = r.u8();
    m.code = c <= 8 ? static_cast<AbortCode>(c) : AbortCode::Generic;
    m.reason = r.str();
    r.expect_done("Abort");
    return m;
  }

  static AbortMsg from_exception(const std::exception& e) {
    AbortCode c = AbortCode::Generic;
    if (dynamic_cast<const WidthError*>(&e)) c = AbortCode::Width;
    else if (dynamic_cast<const ConfigError*>(&e)) c = AbortCode::Config;
    else if (dynamic_cast<const ParseError*>(&e)) c = AbortCode::Parse;
    else if (dynamic_cast<const DecryptionFailure*>(&e)) c = AbortCode::Decryption;
    else if (dynamic_cast<const BudgetExhausted*>(&e)) c = AbortCode::Budget;
    else if (dynamic_cast<const ProtocolError*>(&e)) c = AbortCode::Protocol;
    else if (dynamic_cast<const TransportError*>(&e)) c = AbortCode::Transport;
    else if (dynamic_cast<const UndefinedStatistic*>(&e)) c = AbortCode::Undefined;
    return {c, e.what()};
  }

  [[noreturn]] void rethrow() const {
    switch (code) {
      case AbortCode::Config: throw ConfigError(reason);
      case AbortCode::Width: throw WidthError(reason);
      case AbortCode::Parse: throw ParseError(reason);
      case AbortCode::Decryption: throw DecryptionFailure(reason);
      case AbortCode::Budget: throw BudgetExhausted(reason);
      case AbortCode::Transport: throw TransportError(reason);
      case AbortCode::Undefined: throw UndefinedStatistic(reason);
      case AbortCode::Protocol:
      case AbortCode::Generic: break;
    }
    throw ProtocolError(reason);
  }
};

}  // namespace dmpc::market
