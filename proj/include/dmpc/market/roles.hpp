#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dmpc/gc/garble.hpp"
#include "dmpc/he/serialize.hpp"
#include "dmpc/market/computation.hpp"
#include "dmpc/market/messages.hpp"

namespace dmpc::market {

enum class ProtocolKind : std::uint8_t { He = 1, Gc = 2 };

// Public session parameters every role agrees on before the first frame.
struct SessionSpec {
  std::uint64_t session_id = 1;
  ProtocolKind protocol = ProtocolKind::Gc;
  Computation computation;
  std::uint32_t makers = 1;
  std::uint64_t seed = 1;  // role randomness is Prg(seed, role)
};

// Timings and sizes collected by the roles of one session. Written by one role
// at a time because the driver delivers frames sequentially.
struct SessionMetrics {
  double keygen_ms = 0;
  double encrypt_ms = 0;
  double he_eval_ms = 0;
  double decrypt_ms = 0;
  double label_ms = 0;
  double garble_ms = 0;
  double gc_eval_ms = 0;
  circuit::GateStats gates{};
  std::uint64_t garbled_bytes = 0;  // serialized C_f without constant labels
};

// Secrets the CSP generated, exposed for the transcript hygiene audit only.
struct SessionSecrets {
  std::optional<Block> delta;
  std::optional<Block> prf_key;
  Bytes secret_key;  // serialized sk
};

class Outbox {
 public:
  Outbox(PartyId self, std::uint64_t session) : self_(self), session_(session) {}
  void send(PartyId to, MsgType type, Bytes payload) {
    Frame f;
    f.type = type;
    f.session = session_;
    f.from = self_;
    f.to = to;
    f.payload = std::move(payload);
    frames_.push_back(std::move(f));
  }
  std::vector<Frame> take() { return std::move(frames_); }

 private:
  PartyId self_;
  std::uint64_t session_;
  std::vector<Frame> frames_;
};

class Role {
 public:
  Role(PartyId id, std::shared_ptr<const SessionSpec> spec, std::shared_ptr<SessionMetrics> metrics)
      : id_(id), spec_(std::move(spec)), metrics_(std::move(metrics)) {}
  virtual ~Role() = default;
  Role(const Role&) = delete;
  Role& operator=(const Role&) = delete;

  PartyId id() const { return id_; }
  const SessionSpec& spec() const { return *spec_; }

  std::vector<Frame> start() {
    Outbox out(id_, spec_->session_id);
    on_start(out);
    return out.take();
  }

  // Rejects wrong-session, stale or misaddressed frames, then dispatches.
  std::vector<Frame> handle(const Frame& f) {
    if (f.session != spec_->session_id)
      throw ProtocolError(id_.str() + ": frame for session " + std::to_string(f.session) + ", expected " + std::to_string(spec_->session_id));
    if (f.seq <= last_seq_)
      throw ProtocolError(id_.str() + ": out-of-order frame (seq " + std::to_string(f.seq) + " after " + std::to_string(last_seq_) + ")");
    if (!(f.to == id_) && !(f.to.kind == RoleKind::Broadcast && accepts_broadcast()))
      throw ProtocolError(id_.str() + ": frame addressed to " + f.to.str());
    last_seq_ = f.seq;
    if (f.type == MsgType::Abort) throw ProtocolError(id_.str() + ": peer aborted: " + AbortMsg::decode(f.payload).reason);
    Outbox out(id_, spec_->session_id);
    on_message(f, out);
    return out.take();
  }

  std::uint64_t last_seq() const { return last_seq_; }

 protected:
  virtual void on_start(Outbox&) {}
  virtual void on_message(const Frame& f, Outbox& out) = 0;
  virtual bool accepts_broadcast() const { return false; }

  [[noreturn]] void unexpected(const Frame& f) const {
    throw ProtocolError(id_.str() + ": unexpected " + to_string(f.type) + " from " + f.from.str());
  }
  void expect_from(const Frame& f, RoleKind k) const {
    if (f.from.kind != k) unexpected(f);
  }

  Prg role_prg() const { return Prg(spec_->seed, id_.pack()); }
  SessionMetrics& metrics() { return *metrics_; }
  bool he() const { return spec_->protocol == ProtocolKind::He; }
  const Computation& comp() const { return spec_->computation; }

  static double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }

 private:
  PartyId id_;
  std::shared_ptr<const SessionSpec> spec_;
  std::shared_ptr<SessionMetrics> metrics_;
  std::uint64_t last_seq_ = 0;
};

// Public per-session material derived from the registration: the HE plan
// (Protocol 1) or the circuit (Protocol 2).
struct SessionPublic {
  std::shared_ptr<const HePlan> plan;
  std::shared_ptr<const circuit::Circuit> circuit;

  static SessionPublic make(const SessionSpec& s) {
    SessionPublic p;
    if (s.protocol == ProtocolKind::He) p.plan = std::make_shared<const HePlan>(s.computation, s.makers);
    else p.circuit = circuit_for(s.computation, s.makers);
    return p;
  }
};

class CspRole final : public Role {
 public:
  CspRole(std::shared_ptr<const SessionSpec> spec, std::shared_ptr<SessionMetrics> m, SessionPublic pub)
      : Role(PartyId::csp(), std::move(spec), std::move(m)), pub_(std::move(pub)), prg_(role_prg()) {}

  const SessionSecrets& audit_secrets() const { return secrets_; }

 protected:
  void on_start(Outbox& out) override {
    if (he()) {
      const auto t0 = std::chrono::steady_clock::now();
      keys_ = he::keygen(pub_.plan->ring(), prg_);
      metrics().keygen_ms += ms_since(t0);
      secrets_.secret_key = he::serialize(keys_->sk);
      out.send(PartyId::broadcast(), MsgType::PublicKeyDist, PublicKeyDistMsg{he::serialize(keys_->pk), he::serialize(keys_->rk)}.encode());
      return;
    }
    Block seed = prg_.next_block();
    delta_ = gc::derive_delta(seed);
    prf_key_ = prg_.next_block();
    secrets_.delta = delta_->value();
    secrets_.prf_key = *prf_key_;
    for (std::uint32_t j = 0; j < spec().makers; ++j)
      out.send(PartyId::maker(j), MsgType::DeltaKeyDist, DeltaKeyDistMsg{delta_->value(), *prf_key_}.encode());
  }

  void on_message(const Frame& f, Outbox& out) override {
    expect_from(f, RoleKind::Buyer);
    if (he() && f.type == MsgType::DecryptRequest) {
      const auto req = DecryptRequestMsg::decode(f.payload);
      const auto t0 = std::chrono::steady_clock::now();
      auto values = pub_.plan->decrypt(keys_->sk, analytics::parse_he_listing(req.result));
      metrics().decrypt_ms += ms_since(t0);
      out.send(f.from, MsgType::Result, ResultMsg{std::move(values)}.encode());
    } else if (!he() && f.type == MsgType::Query) {
      check_query(QueryMsg::decode(f.payload));
      if (decoding_.count(f.from.index)) throw ProtocolError("csp: buyer already holds a garbling for this session");
      const auto& c = *pub_.circuit;
      // Zero-labels of maker wires come from the shared PRF keyed by owner.
      std::vector<std::uint32_t> owner(c.n_inputs());
      circuit::WireId off = 0;
      for (const auto& g : c.party_groups()) {
        std::fill(owner.begin() + off, owner.begin() + off + g.width, g.owner);
        off += g.width;
      }
      const gc::InputLabelPrf prf(*prf_key_);
      auto res = gc::garble(c, *delta_, [&](circuit::WireId w) { return prf.zero_label(w, owner[w]); }, prg_);
      metrics().garble_ms += res.garble_ms;
      metrics().gates = c.stats();
      metrics().garbled_bytes = res.garbled.serialized_size();
      decoding_[f.from.index] = std::move(res.decoding);
      out.send(f.from, MsgType::GarbledCircuitMsg,
               GarbledCircuitMsgBody{res.garbled.serialize(), std::move(res.constant_labels)}.encode());
    } else if (!he() && f.type == MsgType::OutputLabels) {
      auto it = decoding_.find(f.from.index);
      if (it == decoding_.end()) throw ProtocolError("csp: output labels before a garbled circuit was issued");
      auto bits = gc::decode(it->second, OutputLabelsMsg::decode(f.payload).labels);
      decoding_.erase(it);
      out.send(f.from, MsgType::OutputDecoding, OutputDecodingMsg{std::move(bits)}.encode());
    } else {
      unexpected(f);
    }
  }

 private:
  void check_query(const QueryMsg& q) const {
    if (q.computation != comp().id() || q.params != comp().describe(spec().makers))
      throw ProtocolError("csp: query for unregistered computation '" + q.computation + "' (" + q.params + ")");
  }

  SessionPublic pub_;
  Prg prg_;
  std::optional<he::KeySet> keys_;
  std::optional<gc::GlobalDelta> delta_;
  std::optional<Block> prf_key_;
  std::map<std::uint32_t, gc::DecodingInfo> decoding_;
  SessionSecrets secrets_;
};

class MakerRole final : public Role {
 public:
  MakerRole(std::uint32_t index, std::shared_ptr<const SessionSpec> spec, std::shared_ptr<SessionMetrics> m, SessionPublic pub,
            MakerInput input)
      : Role(PartyId::maker(index), std::move(spec), std::move(m)), pub_(std::move(pub)), input_(std::move(input)) {}

 protected:
  bool accepts_broadcast() const override { return true; }

  void on_message(const Frame& f, Outbox& out) override {
    expect_from(f, RoleKind::Csp);
    if (sent_) throw ProtocolError(id().str() + ": listing already submitted");
    if (he() && f.type == MsgType::PublicKeyDist) {
      const auto pk = he::parse_public_key(PublicKeyDistMsg::decode(f.payload).public_key);
      Prg prg = role_prg();
      const auto t0 = std::chrono::steady_clock::now();
      auto listing = pub_.plan->encrypt(pk, input_, prg);
      metrics().encrypt_ms += ms_since(t0);
      out.send(PartyId::datatrust(), MsgType::EncryptedListing, EncryptedListingMsg{id().index, analytics::serialize(listing)}.encode());
    } else if (!he() && f.type == MsgType::DeltaKeyDist) {
      const auto m = DeltaKeyDistMsg::decode(f.payload);
      const gc::GlobalDelta delta(m.delta);
      const gc::InputLabelPrf prf(m.prf_key);
      const auto t0 = std::chrono::steady_clock::now();
      const auto wires = maker_wires(*pub_.circuit, id().index);
      const auto bits = maker_bits(comp(), spec().makers, input_);
      if (bits.size() != wires.size()) throw ConfigError(id().str() + ": input width does not match the circuit");
      InputLabelsMsg msg{id().index, {}};
      msg.labels.reserve(wires.size());
      for (std::size_t i = 0; i < wires.size(); ++i) msg.labels.push_back(prf.label(wires[i], bits[i] != 0, delta, id().index));
      metrics().label_ms += ms_since(t0);
      out.send(PartyId::datatrust(), MsgType::InputLabels, msg.encode());
    } else {
      unexpected(f);
    }
    sent_ = true;
  }

 private:
  SessionPublic pub_;
  MakerInput input_;
  bool sent_ = false;
};

// Stores opaque ciphertext or label blobs. Its inbound schema is
// {EncryptedListing, InputLabels, Query}: none of them carries plaintext
// listings, sk, Δ or k.
class DataTrustRole final : public Role {
 public:
  static const std::set<MsgType>& inbound_schema() {
    static const std::set<MsgType> s{MsgType::EncryptedListing, MsgType::InputLabels, MsgType::Query};
    return s;
  }

  DataTrustRole(std::shared_ptr<const SessionSpec> spec, std::shared_ptr<SessionMetrics> m)
      : Role(PartyId::datatrust(), std::move(spec), std::move(m)) {}

 protected:
  void on_message(const Frame& f, Outbox& out) override {
    if (!inbound_schema().count(f.type)) unexpected(f);
    const MsgType listing_type = he() ? MsgType::EncryptedListing : MsgType::InputLabels;
    if (f.type == MsgType::Query) {
      expect_from(f, RoleKind::Buyer);
      const auto q = QueryMsg::decode(f.payload);
      if (q.computation != comp().id()) throw ProtocolError("datatrust: query for unknown computation '" + q.computation + "'");
      pending_.insert(f.from);
    } else {
      if (f.type != listing_type) unexpected(f);
      expect_from(f, RoleKind::Maker);
      std::uint32_t maker = 0;
      Bytes blob;
      if (f.type == MsgType::EncryptedListing) {
        auto m = EncryptedListingMsg::decode(f.payload);
        maker = m.maker;
        blob = std::move(m.listing);
      } else {
        auto m = InputLabelsMsg::decode(f.payload);
        maker = m.maker;
        blob = f.payload;
      }
      if (maker != f.from.index || maker >= spec().makers) throw ProtocolError("datatrust: listing maker mismatch");
      if (!store_.emplace(maker, std::move(blob)).second) throw ProtocolError("datatrust: duplicate listing from " + f.from.str());
    }
    // Queries wait until every maker's listing is present.
    if (store_.size() == spec().makers) {
      for (const auto& buyer : pending_) {
        ListingBundleMsg b;
        b.kind = he() ? BundleKind::Ciphertexts : BundleKind::Labels;
        for (const auto& [m, blob] : store_) b.entries.emplace_back(m, blob);
        out.send(buyer, MsgType::ListingBundle, b.encode());
      }
      pending_.clear();
    }
  }

 private:
  std::map<std::uint32_t, Bytes> store_;
  std::set<PartyId> pending_;
};

class BuyerRole final : public Role {
 public:
  BuyerRole(std::uint32_t index, std::shared_ptr<const SessionSpec> spec, std::shared_ptr<SessionMetrics> m, SessionPublic pub)
      : Role(PartyId::buyer(index), std::move(spec), std::move(m)), pub_(std::move(pub)) {}

  const std::optional<std::vector<std::int64_t>>& result() const { return result_; }

 protected:
  bool accepts_broadcast() const override { return true; }

  QueryMsg query() const { return QueryMsg{id().index, comp().id(), comp().describe(spec().makers)}; }

  // Protocol 2 starts with the buyer's query; Protocol 1 waits for pk.
  void on_start(Outbox& out) override {
    if (he()) return;
    out.send(PartyId::datatrust(), MsgType::Query, query().encode());
    out.send(PartyId::csp(), MsgType::Query, query().encode());
  }

  void on_message(const Frame& f, Outbox& out) override {
    if (result_) throw ProtocolError(id().str() + ": session already finished");
    switch (f.type) {
      case MsgType::PublicKeyDist: {
        if (!he() || rk_) unexpected(f);
        expect_from(f, RoleKind::Csp);
        rk_ = he::parse_relin_key(PublicKeyDistMsg::decode(f.payload).relin_key);
        out.send(PartyId::datatrust(), MsgType::Query, query().encode());
        break;
      }
      case MsgType::ListingBundle: {
        expect_from(f, RoleKind::DataTrust);
        auto b = ListingBundleMsg::decode(f.payload);
        if (b.kind != (he() ? BundleKind::Ciphertexts : BundleKind::Labels) || b.entries.size() != spec().makers)
          throw ProtocolError(id().str() + ": malformed listing bundle");
        if (he()) {
          if (!rk_) unexpected(f);
          std::vector<analytics::HeListing> ls;
          for (const auto& [m, blob] : b.entries) ls.push_back(analytics::parse_he_listing(blob));
          const auto t0 = std::chrono::steady_clock::now();
          auto c = pub_.plan->evaluate(ls, *rk_);
          metrics().he_eval_ms += ms_since(t0);
          out.send(PartyId::csp(), MsgType::DecryptRequest, DecryptRequestMsg{analytics::serialize(c)}.encode());
        } else {
          if (bundle_) unexpected(f);
          bundle_ = std::move(b);
          try_evaluate(out);
        }
        break;
      }
      case MsgType::GarbledCircuitMsg: {
        if (he() || gc_) unexpected(f);
        expect_from(f, RoleKind::Csp);
        gc_ = GarbledCircuitMsgBody::decode(f.payload);
        try_evaluate(out);
        break;
      }
      case MsgType::Result: {
        if (!he()) unexpected(f);
        expect_from(f, RoleKind::Csp);
        auto r = ResultMsg::decode(f.payload);
        if (r.values.size() != comp().instances) throw ProtocolError(id().str() + ": result has the wrong length");
        result_ = std::move(r.values);
        break;
      }
      case MsgType::OutputDecoding: {
        if (he()) unexpected(f);
        expect_from(f, RoleKind::Csp);
        result_ = values_from_bits(comp(), OutputDecodingMsg::decode(f.payload).bits);
        break;
      }
      default: unexpected(f);
    }
  }

 private:
  // Evaluates once both the garbled circuit and the input labels are in.
  void try_evaluate(Outbox& out) {
    if (!bundle_ || !gc_) return;
    // The evaluator only needs topology, so it rebuilds C_f from the
    // registration and drops constant values.
    const auto& c = *pub_.circuit;
    std::vector<gc::WireLabel> active(c.n_input_wires());
    std::vector<bool> filled(c.n_inputs(), false);
    for (const auto& [m, blob] : bundle_->entries) {
      const auto msg = InputLabelsMsg::decode(blob);
      if (msg.maker != m) throw ProtocolError(id().str() + ": bundle entry maker mismatch");
      const auto wires = maker_wires(c, m);
      if (wires.size() != msg.labels.size()) throw ProtocolError(id().str() + ": maker " + std::to_string(m) + " sent the wrong label count");
      for (std::size_t i = 0; i < wires.size(); ++i) {
        active[wires[i]] = msg.labels[i];
        filled[wires[i]] = true;
      }
    }
    if (std::find(filled.begin(), filled.end(), false) != filled.end()) throw ProtocolError(id().str() + ": missing input labels");
    if (gc_->constant_labels.size() != c.n_constants()) throw ProtocolError(id().str() + ": wrong constant label count");
    std::copy(gc_->constant_labels.begin(), gc_->constant_labels.end(), active.begin() + c.n_inputs());
    const auto t0 = std::chrono::steady_clock::now();
    auto outputs = gc::evaluate(gc::GarbledCircuit::parse(gc_->garbled), c, active);
    metrics().gc_eval_ms += ms_since(t0);
    bundle_.reset();
    gc_.reset();
    out.send(PartyId::csp(), MsgType::OutputLabels, OutputLabelsMsg{std::move(outputs)}.encode());
  }

  SessionPublic pub_;
  std::optional<he::RelinKey> rk_;
  std::optional<ListingBundleMsg> bundle_;
  std::optional<GarbledCircuitMsgBody> gc_;
  std::optional<std::vector<std::int64_t>> result_;
};

}  // namespace dmpc::market
