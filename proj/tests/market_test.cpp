#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dmpc/market/session.hpp"

using namespace dmpc;
using namespace dmpc::market;
using analytics::HaplotypeCounts;

namespace {

std::shared_ptr<const analytics::LrModel> model() {
  static auto m = std::make_shared<const analytics::LrModel>(analytics::read_lr_model(std::string(DMPC_DATA_DIR) + "/lr_model.txt"));
  return m;
}

const analytics::LrSamples& samples() {
  static auto s = analytics::read_lr_samples(std::string(DMPC_DATA_DIR) + "/breast_cancer.csv");
  return s;
}

Computation ld(std::uint32_t instances = 1) {
  Computation c;
  c.workload = Workload::Ld;
  c.instances = instances;
  return c;
}

Computation lr(std::uint32_t rows) {
  Computation c;
  c.workload = Workload::Lr;
  c.instances = rows;
  c.model = model();
  return c;
}

MakerInput ld_input(std::vector<HaplotypeCounts> v) {
  MakerInput m;
  m.ld = std::move(v);
  return m;
}

MakerInput lr_input(std::size_t first, std::size_t rows) {
  MakerInput m;
  for (std::size_t i = first; i < first + rows; ++i) m.lr_rows.push_back(analytics::quantize_row(model()->spec, samples().rows[i]));
  return m;
}

// Four makers each holding one of the counts (30, 20, 20, 30).
std::vector<MakerInput> split_30_20_20_30() {
  return {ld_input({{30, 0, 0, 0}}), ld_input({{0, 20, 0, 0}}), ld_input({{0, 0, 20, 0}}), ld_input({{0, 0, 0, 30}})};
}

std::vector<MsgType> repeat(MsgType t, std::size_t n) { return std::vector<MsgType>(n, t); }

std::vector<MsgType> concat(std::initializer_list<std::vector<MsgType>> parts) {
  std::vector<MsgType> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<MsgType> p1_sequence(std::size_t makers) {
  using M = MsgType;
  return concat({{M::PublicKeyDist}, repeat(M::EncryptedListing, makers), {M::Query, M::ListingBundle, M::DecryptRequest, M::Result}});
}

std::vector<MsgType> p2_sequence(std::size_t makers) {
  using M = MsgType;
  return concat({repeat(M::DeltaKeyDist, makers), repeat(M::InputLabels, makers),
                 {M::Query, M::Query, M::ListingBundle, M::GarbledCircuitMsg, M::OutputLabels, M::OutputDecoding}});
}

void expect_clean(const Computation& c, const std::vector<MakerInput>& in, const SessionOutcome& out) {
  std::vector<Bytes> needles;
  for (const auto& m : in) {
    auto n = plaintext_needles(c, static_cast<std::uint32_t>(in.size()), m);
    needles.insert(needles.end(), n.begin(), n.end());
  }
  const auto bad = audit_datatrust(out.transcript, out.secrets, needles);
  EXPECT_TRUE(bad.empty()) << bad.front();
}

}  // namespace

TEST(Frame, RoundTripAndStrictParsing) {
  Frame f;
  f.type = MsgType::Query;
  f.session = 0x0102030405060708ULL;
  f.seq = 9;
  f.from = PartyId::buyer(3);
  f.to = PartyId::datatrust();
  f.payload = QueryMsg{3, "ld-test", "makers=1"}.encode();
  auto b = f.encode();
  // 4-byte big-endian length, then the type byte.
  EXPECT_EQ(b.size(), f.wire_size());
  EXPECT_EQ((std::uint32_t{b[0]} << 24 | std::uint32_t{b[1]} << 16 | std::uint32_t{b[2]} << 8 | b[3]), b.size() - 4);
  EXPECT_EQ(b[4], 3);
  auto g = Frame::decode(b);
  EXPECT_EQ(g.type, f.type);
  EXPECT_EQ(g.session, f.session);
  EXPECT_EQ(g.seq, 9u);
  EXPECT_EQ(g.from, f.from);
  EXPECT_EQ(g.to, f.to);
  EXPECT_EQ(g.payload, f.payload);
  EXPECT_EQ(QueryMsg::decode(g.payload).params, "makers=1");

  Frame::stamp_seq(b, 77);
  EXPECT_EQ(Frame::decode(b).seq, 77u);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, b.size() - 1})
    EXPECT_THROW(Frame::decode(std::span(b.data(), cut)), ParseError) << cut;
  auto longer = b;
  longer.push_back(0);
  EXPECT_THROW(Frame::decode(longer), ParseError);
  auto bad_type = b;
  bad_type[4] = 42;
  EXPECT_THROW(Frame::decode(bad_type), ParseError);
  auto bad_party = b;
  bad_party[4 + 1 + 16] = 9;
  EXPECT_THROW(Frame::decode(bad_party), ParseError);
}

TEST(Messages, PayloadRoundTrips) {
  Prg prg(1);
  const Block a = prg.next_block(), k = prg.next_block();
  auto d = DeltaKeyDistMsg::decode(DeltaKeyDistMsg{a, k}.encode());
  EXPECT_EQ(d.delta, a);
  EXPECT_EQ(d.prf_key, k);

  InputLabelsMsg il{2, {a, k, a ^ k}};
  auto il2 = InputLabelsMsg::decode(il.encode());
  EXPECT_EQ(il2.maker, 2u);
  EXPECT_EQ(il2.labels, il.labels);

  ListingBundleMsg lb;
  lb.kind = BundleKind::Labels;
  lb.entries = {{0, Bytes{1, 2}}, {5, Bytes{}}};
  auto lb2 = ListingBundleMsg::decode(lb.encode());
  EXPECT_EQ(lb2.kind, BundleKind::Labels);
  EXPECT_EQ(lb2.entries, lb.entries);

  OutputDecodingMsg od{{1, 0, 1, 1, 0, 0, 0, 0, 1}};
  EXPECT_EQ(OutputDecodingMsg::decode(od.encode()).bits, od.bits);
  ResultMsg r{{-5, 0, std::int64_t{1} << 61}};
  EXPECT_EQ(ResultMsg::decode(r.encode()).values, r.values);
  GarbledCircuitMsgBody g{Bytes{9, 9}, {a}};
  auto g2 = GarbledCircuitMsgBody::decode(g.encode());
  EXPECT_EQ(g2.garbled, g.garbled);
  EXPECT_EQ(g2.constant_labels, g.constant_labels);

  auto ab = AbortMsg::decode(AbortMsg::from_exception(DecryptionFailure("bottom")).encode());
  EXPECT_EQ(ab.code, AbortCode::Decryption);
  EXPECT_THROW(ab.rethrow(), DecryptionFailure);
  EXPECT_THROW(AbortMsg::decode(AbortMsg::from_exception(WidthError("w")).encode()).rethrow(), WidthError);

  // Truncated or padded payloads are rejected.
  auto bytes = il.encode();
  EXPECT_THROW(InputLabelsMsg::decode(std::span(bytes.data(), bytes.size() - 1)), ParseError);
  bytes.push_back(0);
  EXPECT_THROW(InputLabelsMsg::decode(bytes), ParseError);
}

TEST(Protocol1, FourMakersSplitCountsDetectLinkage) {
  const auto in = split_30_20_20_30();
  auto out = run_protocol1(ld(), in);
  EXPECT_EQ(out.values, (std::vector<std::int64_t>{1}));
  EXPECT_EQ(out.values, oracle(ld(), in));
  EXPECT_EQ(out.transcript.types(), p1_sequence(4));
  expect_clean(ld(), in, out);
}

TEST(Protocol1, EquilibriumIsNotSignificant) {
  auto out = run_protocol1(ld(), {ld_input({{25, 25, 25, 25}})});
  EXPECT_EQ(out.values, (std::vector<std::int64_t>{0}));
  EXPECT_EQ(out.transcript.types(), p1_sequence(1));
}

TEST(Protocol1, BatchedAndScalarAgreeWithOracle) {
  Prg prg(4);
  std::vector<HaplotypeCounts> a, b;
  for (int i = 0; i < 6; ++i) {
    auto c = analytics::random_haplotype_counts(prg, 800);
    a.push_back(c);
    b.push_back({c.n_AB / 2, c.n_Ab / 2, c.n_aB / 2, c.n_ab / 2});
    a.back() = {c.n_AB - b.back().n_AB, c.n_Ab - b.back().n_Ab, c.n_aB - b.back().n_aB, c.n_ab - b.back().n_ab};
  }
  const std::vector<MakerInput> in{ld_input(a), ld_input(b)};
  auto comp = ld(6);
  const auto expect = oracle(comp, in);
  EXPECT_EQ(run_protocol1(comp, in).values, expect);
  comp.encoding = he::Encoding::Scalar;
  EXPECT_EQ(run_protocol1(comp, in).values, expect);
}

TEST(Protocol1, LrRowsMatchFixedPointOracle) {
  const std::vector<MakerInput> in{lr_input(0, 40)};
  auto out = run_protocol1(lr(40), in);
  EXPECT_EQ(out.values, oracle(lr(40), in));
  expect_clean(lr(40), in, out);
}

TEST(Protocol1, PlanRejectedBeforeAnyFrame) {
  auto c = ld();
  c.n_max = 1000000000;
  EXPECT_THROW(run_protocol1(c, {ld_input({{1, 1, 1, 1}})}), ConfigError);
  auto wide = lr(1);
  wide.instances = 0;
  EXPECT_THROW(run_protocol1(wide, {lr_input(0, 1)}), ConfigError);
  // Inputs above the plan's N bound fail at the maker and abort the session.
  EXPECT_THROW(run_protocol1(ld(), {ld_input({{1000, 1000, 1, 1}})}), ConfigError);
}

TEST(Protocol2, SplitCountsAcrossFourMakers) {
  const auto in = split_30_20_20_30();
  auto out = run_protocol2(ld(), in);
  EXPECT_EQ(out.values, (std::vector<std::int64_t>{1}));
  EXPECT_EQ(out.transcript.types(), p2_sequence(4));
  // Only protocol message types appear; there is no oblivious-transfer step.
  for (auto t : out.transcript.types()) EXPECT_NE(std::string(to_string(t)), "?");
  expect_clean(ld(), in, out);
  EXPECT_EQ(out.metrics.garbled_bytes, gc::GarbledCircuit::kHeaderBytes + 32 * out.metrics.gates.non_xor);
  EXPECT_GT(out.transcript.gc_comm_bytes(), out.metrics.garbled_bytes);
}

TEST(Protocol2, RandomLdInstancesMatchOracle) {
  Prg prg(6);
  std::vector<HaplotypeCounts> cs;
  for (int i = 0; i < 8; ++i) cs.push_back(analytics::random_haplotype_counts(prg, 1600));
  const std::vector<MakerInput> in{ld_input(cs)};
  EXPECT_EQ(run_protocol2(ld(8), in).values, oracle(ld(8), in));
}

TEST(Protocol2, LrRowsMatchFixedPointOracle) {
  const std::vector<MakerInput> in{lr_input(100, 3)};
  auto out = run_protocol2(lr(3), in);
  EXPECT_EQ(out.values, oracle(lr(3), in));
  EXPECT_EQ(out.transcript.types(), p2_sequence(1));
  expect_clean(lr(3), in, out);
}

TEST(Transport, TcpMatchesInProcess) {
  SessionOptions tcp;
  tcp.transport = TransportKind::Tcp;
  const auto ld_in = split_30_20_20_30();
  const std::vector<MakerInput> lr_in{lr_input(7, 2)};
  struct Case {
    bool p1;
    Computation comp;
    const std::vector<MakerInput>* in;
  };
  for (const auto& c : {Case{true, ld(), &ld_in}, Case{false, ld(), &ld_in}, Case{true, lr(2), &lr_in}, Case{false, lr(2), &lr_in}}) {
    auto a = c.p1 ? run_protocol1(c.comp, *c.in) : run_protocol2(c.comp, *c.in);
    auto b = c.p1 ? run_protocol1(c.comp, *c.in, tcp) : run_protocol2(c.comp, *c.in, tcp);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.transcript.types(), b.transcript.types());
    ASSERT_EQ(a.transcript.size(), b.transcript.size());
    for (std::size_t i = 0; i < a.transcript.size(); ++i) {
      const auto &x = a.transcript.entries()[i], &y = b.transcript.entries()[i];
      EXPECT_EQ(x.bytes, y.bytes);
      EXPECT_EQ(x.frame, y.frame);
      EXPECT_EQ(x.from, y.from);
      EXPECT_EQ(x.to, y.to);
    }
  }
}

namespace {

// Accepts one connection, reads the driver's start marker and answers with
// the first `keep` bytes of a valid frame before hanging up.
void serve_truncated(detail::tcp::acceptor& acc, Bytes frame, std::size_t keep) {
  boost::asio::io_context io;
  detail::tcp::socket s(acc.get_executor());
  acc.accept(s);
  std::uint8_t marker[4];
  boost::asio::read(s, boost::asio::buffer(marker));
  boost::asio::write(s, boost::asio::buffer(frame.data(), keep));
  s.shutdown(detail::tcp::socket::shutdown_both);
}

}  // namespace

TEST(Transport, TruncatedFrameAbortsSession) {
  boost::asio::io_context io;
  detail::tcp::acceptor acc(io, detail::tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), 0));
  Frame f;
  f.type = MsgType::PublicKeyDist;
  f.session = 1;
  f.from = PartyId::csp();
  f.to = PartyId::broadcast();
  f.payload = Bytes(100, 7);
  std::thread t(serve_truncated, std::ref(acc), f.encode(), 60);
  {
    auto ep = transport_connect(PartyId::csp(), "127.0.0.1", acc.local_endpoint().port());
    SessionDriver d(1, {ep.get()});
    EXPECT_THROW(d.start(PartyId::csp()), TransportError);
    // The abort is logged; no protocol frame made it through.
    ASSERT_EQ(d.transcript().size(), 1u);
    EXPECT_EQ(d.transcript().entries()[0].type, MsgType::Abort);
  }
  t.join();
}

TEST(Transport, ConnectionLossAndBadLength) {
  boost::asio::io_context io;
  detail::tcp::acceptor acc(io, detail::tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), 0));
  // A length field below the header size is rejected as malformed.
  Bytes junk{0, 0, 0, 5, 1, 2, 3, 4, 5};
  std::thread t(serve_truncated, std::ref(acc), junk, junk.size());
  auto ep = transport_connect(PartyId::csp(), "127.0.0.1", acc.local_endpoint().port());
  EXPECT_THROW(ep->start(), TransportError);
  t.join();
  const auto port = acc.local_endpoint().port();
  acc.close();
  EXPECT_THROW(transport_connect(PartyId::csp(), "127.0.0.1", port), TransportError);
}

namespace {

// Bounces a Query back and forth until `limit` frames have been exchanged.
class PingRole final : public Role {
 public:
  PingRole(PartyId self, PartyId peer, std::shared_ptr<const SessionSpec> s, std::size_t limit, std::vector<std::uint64_t>* seen)
      : Role(self, std::move(s), std::make_shared<SessionMetrics>()), peer_(peer), limit_(limit), seen_(seen) {}

 protected:
  void on_start(Outbox& out) override { out.send(peer_, MsgType::Query, QueryMsg{0, "ping", ""}.encode()); }
  void on_message(const Frame& f, Outbox& out) override {
    seen_->push_back(f.seq);
    if (f.seq < limit_) out.send(peer_, MsgType::Query, QueryMsg{0, "ping", std::to_string(f.seq)}.encode());
  }

 private:
  PartyId peer_;
  std::size_t limit_;
  std::vector<std::uint64_t>* seen_;
};

}  // namespace

TEST(Sequencing, ThousandMessageSessionIsStrictlyIncreasing) {
  auto spec = std::make_shared<SessionSpec>();
  spec->session_id = 5;
  for (auto transport : {TransportKind::InProcess, TransportKind::Tcp}) {
    std::vector<std::uint64_t> seen;
    PingRole a(PartyId::buyer(0), PartyId::buyer(1), spec, 1000, &seen), b(PartyId::buyer(1), PartyId::buyer(0), spec, 1000, &seen);
    std::vector<std::unique_ptr<TcpRoleServer>> servers;
    std::vector<std::unique_ptr<Endpoint>> eps;
    for (Role* r : {static_cast<Role*>(&a), static_cast<Role*>(&b)}) {
      if (transport == TransportKind::Tcp) {
        servers.push_back(transport_serve(*r));
        eps.push_back(transport_connect(r->id(), "127.0.0.1", servers.back()->port()));
      } else {
        eps.push_back(std::make_unique<LocalEndpoint>(*r));
      }
    }
    SessionDriver d(5, {eps[0].get(), eps[1].get()});
    d.start(a.id());
    d.run();
    eps.clear();
    servers.clear();
    ASSERT_EQ(d.transcript().size(), 1000u);
    for (std::size_t i = 0; i < 1000; ++i) ASSERT_EQ(d.transcript().entries()[i].seq, i + 1);
    ASSERT_EQ(seen.size(), 1000u);
    for (std::size_t i = 1; i < seen.size(); ++i) ASSERT_GT(seen[i], seen[i - 1]);
  }
}

TEST(Sequencing, RolesRejectReplayWrongSessionAndMisaddressedFrames) {
  auto spec = std::make_shared<SessionSpec>();
  spec->session_id = 9;
  spec->protocol = ProtocolKind::Gc;
  spec->computation = ld();
  DataTrustRole dt(spec, std::make_shared<SessionMetrics>());
  Frame q;
  q.type = MsgType::Query;
  q.session = 9;
  q.seq = 10;
  q.from = PartyId::buyer();
  q.to = PartyId::datatrust();
  q.payload = QueryMsg{0, "ld-test", ""}.encode();
  EXPECT_NO_THROW(dt.handle(q));
  EXPECT_THROW(dt.handle(q), ProtocolError);  // replayed sequence number
  q.seq = 11;
  q.session = 8;
  EXPECT_THROW(dt.handle(q), ProtocolError);
  q.session = 9;
  q.to = PartyId::csp();
  EXPECT_THROW(dt.handle(q), ProtocolError);
  // Schema: key material never reaches the datatrust.
  Frame k = q;
  k.seq = 12;
  k.to = PartyId::datatrust();
  k.from = PartyId::csp();
  k.type = MsgType::DeltaKeyDist;
  k.payload = DeltaKeyDistMsg{Block{1, 1}, Block{2, 2}}.encode();
  EXPECT_THROW(dt.handle(k), ProtocolError);
  k.seq = 13;
  k.type = MsgType::PublicKeyDist;
  k.to = PartyId::broadcast();
  EXPECT_THROW(dt.handle(k), ProtocolError);
}

TEST(Hygiene, AuditFindsPlantedLeaks) {
  const auto in = split_30_20_20_30();
  auto out = run_protocol2(ld(), in);
  ASSERT_TRUE(out.secrets.delta.has_value());
  // Append a forged datatrust-bound frame carrying Δ.
  Transcript t = out.transcript;
  Frame f;
  f.type = MsgType::InputLabels;
  f.session = 1;
  f.seq = 1000;
  f.from = PartyId::maker(0);
  f.to = PartyId::datatrust();
  f.payload = InputLabelsMsg{0, {*out.secrets.delta}}.encode();
  t.record(f.encode(), f);
  EXPECT_EQ(audit_datatrust(t, out.secrets, {}).size(), 1u);

  Frame p = f;
  p.seq = 1001;
  ByteWriter w;
  for (std::uint64_t v : {30, 0, 0, 0}) w.u64(v);
  p.payload = w.take();
  t.record(p.encode(), p);
  EXPECT_EQ(audit_datatrust(t, out.secrets, plaintext_needles(ld(), 4, in[0])).size(), 2u);

  Frame k = f;
  k.seq = 1002;
  k.type = MsgType::DeltaKeyDist;
  k.payload = {};
  t.record(k.encode(), k);
  EXPECT_EQ(audit_datatrust(t, out.secrets, {}).size(), 2u);
}

TEST(Hygiene, CspRejectsUnregisteredQuery) {
  auto spec = std::make_shared<SessionSpec>();
  spec->protocol = ProtocolKind::Gc;
  spec->computation = ld();
  CspRole csp(spec, std::make_shared<SessionMetrics>(), SessionPublic::make(*spec));
  csp.start();
  Frame q;
  q.type = MsgType::Query;
  q.session = 1;
  q.seq = 1;
  q.from = PartyId::buyer();
  q.to = PartyId::csp();
  q.payload = QueryMsg{0, "ld-test", "makers=1;instances=99"}.encode();
  EXPECT_THROW(csp.handle(q), ProtocolError);
  q.seq = 2;
  q.payload = QueryMsg{0, "ld-test", ld().describe(1)}.encode();
  auto reply = csp.handle(q);
  ASSERT_EQ(reply.size(), 1u);
  EXPECT_EQ(reply[0].type, MsgType::GarbledCircuitMsg);
  q.seq = 3;
  EXPECT_THROW(csp.handle(q), ProtocolError);  // one garbling per buyer
}

TEST(TranscriptExport, JsonLinesReproduceTotals) {
  auto out = run_protocol2(ld(10), {ld_input(std::vector<HaplotypeCounts>(10, {30, 20, 20, 30}))});
  std::stringstream ss;
  out.transcript.write_jsonl(ss, 1);
  std::string line;
  std::uint64_t total = 0, gc = 0;
  std::size_t n = 0;
  while (std::getline(ss, line)) {
    auto j = nlohmann::json::parse(line);
    total += j["bytes"].get<std::uint64_t>();
    const auto type = j["type"].get<std::string>();
    if (type == "GarbledCircuitMsg" || type == "InputLabels") gc += j["bytes"].get<std::uint64_t>();
    EXPECT_EQ(j["seq"].get<std::uint64_t>(), ++n);
  }
  EXPECT_EQ(n, out.transcript.size());
  EXPECT_EQ(total, out.transcript.total_bytes());
  EXPECT_EQ(gc, out.transcript.gc_comm_bytes());
}

TEST(Concurrency, SessionsRunIndependently) {
  std::vector<std::int64_t> r1, r2;
  std::thread a([&] { r1 = run_protocol2(ld(), split_30_20_20_30(), {TransportKind::Tcp, 11, 1}).values; });
  std::thread b([&] { r2 = run_protocol2(ld(), {ld_input({{25, 25, 25, 25}})}, {TransportKind::InProcess, 12, 2}).values; });
  a.join();
  b.join();
  EXPECT_EQ(r1, (std::vector<std::int64_t>{1}));
  EXPECT_EQ(r2, (std::vector<std::int64_t>{0}));
}
