#pragma once

#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmpc/market/computation.hpp"
#include "dmpc/market/messages.hpp"
#include "dmpc/market/roles.hpp"

namespace dmpc::market {

struct TranscriptEntry {
  std::uint64_t seq = 0;
  PartyId from;
  PartyId to;
  MsgType type = MsgType::Abort;
  std::uint64_t bytes = 0;  // full frame size on the wire
  std::int64_t t_us = 0;    // since session start; not deterministic
  Bytes frame;              // retained only for frames touching the datatrust
};

class Transcript {
 public:
  Transcript() : t0_(std::chrono::steady_clock::now()) {}

  void record(const Bytes& encoded, const Frame& f) {
    TranscriptEntry e;
    e.seq = f.seq;
    e.from = f.from;
    e.to = f.to;
    e.type = f.type;
    e.bytes = encoded.size();
    e.t_us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0_).count();
    if (f.from.kind == RoleKind::DataTrust || f.to.kind == RoleKind::DataTrust) e.frame = encoded;
    entries_.push_back(std::move(e));
  }

  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::vector<MsgType> types() const {
    std::vector<MsgType> t;
    for (const auto& e : entries_) t.push_back(e.type);
    return t;
  }

  std::uint64_t total_bytes() const {
    std::uint64_t n = 0;
    for (const auto& e : entries_) n += e.bytes;
    return n;
  }

  std::uint64_t bytes_of(MsgType t) const {
    std::uint64_t n = 0;
    for (const auto& e : entries_)
      if (e.type == t) n += e.bytes;
    return n;
  }

  std::size_t count_of(MsgType t) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.type == t;
    return n;
  }

  // Garbled circuit plus input labels: the communication figure reported for
  // the garbled-circuit backend.
  std::uint64_t gc_comm_bytes() const { return bytes_of(MsgType::GarbledCircuitMsg) + bytes_of(MsgType::InputLabels); }

  // One JSON object per line; `t_us` is the only non-deterministic field.
  void write_jsonl(std::ostream& os, std::uint64_t session) const {
    for (const auto& e : entries_) {
      nlohmann::json j{{"session", session}, {"seq", e.seq},   {"from", e.from.str()}, {"to", e.to.str()},
                       {"type", to_string(e.type)}, {"bytes", e.bytes}, {"t_us", e.t_us}};
      os << j.dump() << '\n';
    }
  }

 private:
  std::chrono::steady_clock::time_point t0_;
  std::vector<TranscriptEntry> entries_;
};

// Byte strings whose presence in a datatrust frame would leak a maker's
// listing: the per-instance values as consecutive big-endian u64s (LD
// counts, LR raw features) and the maker's packed circuit input bits.
inline std::vector<Bytes> plaintext_needles(const Computation& c, std::uint32_t makers, const MakerInput& in) {
  std::vector<Bytes> out;
  if (c.workload == Workload::Ld) {
    for (const auto& h : in.ld) {
      ByteWriter w;
      for (std::size_t f = 0; f < 4; ++f) w.u64(h.field(f));
      out.push_back(w.take());
    }
  } else {
    for (const auto& row : in.lr_rows) {
      ByteWriter w;
      for (auto v : row) w.u64(static_cast<std::uint64_t>(v));
      out.push_back(w.take());
    }
  }
  const auto bits = maker_bits(c, makers, in);
  if (bits.size() >= 64) {
    Bytes packed((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) packed[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1u) << (i % 8));
    out.push_back(std::move(packed));
  }
  return out;
}

// Violations of the datatrust invariant in a transcript: inbound message types
// outside its schema, and any retained frame containing Δ, k, sk bytes or a
// plaintext needle. Empty means clean.
inline std::vector<std::string> audit_datatrust(const Transcript& t, const SessionSecrets& s, const std::vector<Bytes>& plaintext) {
  std::vector<std::string> bad;
  std::vector<std::pair<std::string, Bytes>> needles;
  auto add_block = [&](const char* name, const Block& b) {
    ByteWriter w;
    write_block(w, b);
    needles.emplace_back(name, w.take());
    const auto le = b.le_bytes();
    needles.emplace_back(std::string(name) + " (le)", Bytes(le.begin(), le.end()));
  };
  if (s.delta) add_block("delta", *s.delta);
  if (s.prf_key) add_block("prf key", *s.prf_key);
  if (s.secret_key.size() > 64) {
    // The coefficient body, without the header.
    needles.emplace_back("secret key", Bytes(s.secret_key.end() - 64, s.secret_key.end()));
  }
  for (const auto& p : plaintext)
    if (p.size() >= 16) needles.emplace_back("plaintext listing", p);

  for (const auto& e : t.entries()) {
    if (e.to.kind == RoleKind::DataTrust && !DataTrustRole::inbound_schema().count(e.type))
      bad.push_back("seq " + std::to_string(e.seq) + ": datatrust received " + to_string(e.type));
    if (e.frame.empty()) continue;
    for (const auto& [name, n] : needles)
      if (contains_bytes(e.frame, n)) bad.push_back("seq " + std::to_string(e.seq) + " (" + to_string(e.type) + "): contains " + name);
  }
  return bad;
}

}  // namespace dmpc::market
