#pragma once

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dmpc/market/transcript.hpp"
#include "dmpc/market/transport.hpp"

namespace dmpc::market {

// Routes frames between endpoints in FIFO order, stamping the session-wide
// sequence number and logging every frame. Delivery is sequential, so a
// session's transcript is the same whatever transport carries it.
class SessionDriver {
 public:
  SessionDriver(std::uint64_t session, std::vector<Endpoint*> endpoints) : session_(session) {
    for (auto* e : endpoints) {
      if (!routes_.emplace(e->id(), e).second) throw ConfigError("duplicate endpoint " + e->id().str());
    }
  }

  void start(PartyId who) {
    auto* ep = route(who);
    guarded(who, [&] { enqueue(who, ep->start()); });
  }

  // Delivers queued frames until the session goes quiet.
  void run() {
    while (!queue_.empty()) {
      Bytes bytes = std::move(queue_.front());
      queue_.pop_front();
      const Frame f = Frame::decode(bytes);
      for (auto* ep : recipients(f)) guarded(ep->id(), [&] { enqueue(ep->id(), ep->deliver(bytes)); });
    }
  }

  const Transcript& transcript() const { return transcript_; }
  Transcript take_transcript() { return std::move(transcript_); }

 private:
  Endpoint* route(PartyId p) const {
    auto it = routes_.find(p);
    if (it == routes_.end()) throw ProtocolError("no route to " + p.str());
    return it->second;
  }

  // Broadcasts reach makers then buyers, in index order.
  std::vector<Endpoint*> recipients(const Frame& f) const {
    if (f.to.kind != RoleKind::Broadcast) return {route(f.to)};
    std::vector<Endpoint*> out;
    for (auto kind : {RoleKind::Maker, RoleKind::Buyer})
      for (const auto& [id, ep] : routes_)
        if (id.kind == kind && !(id == f.from)) out.push_back(ep);
    return out;
  }

  void enqueue(PartyId sender, std::vector<Bytes> frames) {
    for (auto& b : frames) {
      Frame::stamp_seq(b, ++seq_);
      const Frame f = Frame::decode(b);
      if (f.session != session_) throw ProtocolError(sender.str() + " emitted a frame for session " + std::to_string(f.session));
      if (!(f.from == sender)) throw ProtocolError(sender.str() + " emitted a frame claiming to be from " + f.from.str());
      if (f.type == MsgType::Abort) throw ProtocolError(sender.str() + " aborted");
      transcript_.record(b, f);
      queue_.push_back(std::move(b));
    }
  }

  // Logs an Abort for the failing party and stops the session.
  template <class F>
  void guarded(PartyId who, F&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      Frame abort;
      abort.type = MsgType::Abort;
      abort.session = session_;
      abort.seq = ++seq_;
      abort.from = who;
      abort.to = who;
      abort.payload = AbortMsg::from_exception(e).encode();
      transcript_.record(abort.encode(), abort);
      queue_.clear();
      throw;
    }
  }

  std::uint64_t session_;
  std::uint64_t seq_ = 0;
  std::map<PartyId, Endpoint*> routes_;
  std::deque<Bytes> queue_;
  Transcript transcript_;
};

enum class TransportKind { InProcess, Tcp };

inline const char* to_string(TransportKind t) { return t == TransportKind::Tcp ? "tcp" : "inproc"; }

struct SessionOptions {
  TransportKind transport = TransportKind::InProcess;
  std::uint64_t session_id = 1;
  std::uint64_t seed = 1;
  std::string host = "127.0.0.1";
};

struct SessionOutcome {
  std::vector<std::int64_t> values;  // LD decisions (0/1) or LR raw probabilities
  Transcript transcript;
  SessionMetrics metrics;
  SessionSecrets secrets;  // for auditing only
};

namespace detail {

inline SessionOutcome run_session(ProtocolKind proto, const Computation& comp, const std::vector<MakerInput>& inputs,
                                  const SessionOptions& opt) {
  auto spec = std::make_shared<SessionSpec>();
  spec->session_id = opt.session_id;
  spec->protocol = proto;
  spec->computation = comp;
  spec->makers = static_cast<std::uint32_t>(inputs.size());
  spec->seed = opt.seed;
  if (inputs.empty()) throw ConfigError("a session needs at least one maker");
  // Plan and circuit checks happen here, before any frame exists.
  const SessionPublic pub = SessionPublic::make(*spec);
  SessionPublic buyer_pub = pub;
  if (pub.circuit) buyer_pub.circuit = topology_for(comp, spec->makers);

  auto metrics = std::make_shared<SessionMetrics>();
  std::vector<std::unique_ptr<Role>> roles;
  auto csp_owned = std::make_unique<CspRole>(spec, metrics, pub);
  auto* csp = csp_owned.get();
  roles.push_back(std::move(csp_owned));
  roles.push_back(std::make_unique<DataTrustRole>(spec, metrics));
  for (std::uint32_t j = 0; j < spec->makers; ++j) roles.push_back(std::make_unique<MakerRole>(j, spec, metrics, pub, inputs[j]));
  auto buyer_owned = std::make_unique<BuyerRole>(0, spec, metrics, buyer_pub);
  auto* buyer = buyer_owned.get();
  roles.push_back(std::move(buyer_owned));

  // Servers outlive endpoints: endpoints close first, servers then see EOF.
  std::vector<std::unique_ptr<TcpRoleServer>> servers;
  std::vector<std::unique_ptr<Endpoint>> endpoints;
  for (auto& r : roles) {
    if (opt.transport == TransportKind::Tcp) {
      servers.push_back(transport_serve(*r, opt.host));
      endpoints.push_back(transport_connect(r->id(), opt.host, servers.back()->port()));
    } else {
      endpoints.push_back(std::make_unique<LocalEndpoint>(*r));
    }
  }
  std::vector<Endpoint*> eps;
  for (auto& e : endpoints) eps.push_back(e.get());

  SessionDriver driver(spec->session_id, eps);
  driver.start(PartyId::csp());
  driver.run();
  driver.start(PartyId::buyer());
  driver.run();
  endpoints.clear();
  servers.clear();

  if (!buyer->result()) throw ProtocolError("session ended without a result for the buyer");
  SessionOutcome out;
  out.values = *buyer->result();
  out.transcript = driver.take_transcript();
  out.metrics = *metrics;
  out.secrets = csp->audit_secrets();
  return out;
}

}  // namespace detail

// Protocol 1: HE listings, f' evaluated by the buyer, decryption at the CSP.
inline SessionOutcome run_protocol1(const Computation& comp, const std::vector<MakerInput>& inputs, const SessionOptions& opt = {}) {
  return detail::run_session(ProtocolKind::He, comp, inputs, opt);
}

// Protocol 2: garbled circuit with PRF-derived input labels; no oblivious
// transfer.
inline SessionOutcome run_protocol2(const Computation& comp, const std::vector<MakerInput>& inputs, const SessionOptions& opt = {}) {
  return detail::run_session(ProtocolKind::Gc, comp, inputs, opt);
}

}  // namespace dmpc::market
