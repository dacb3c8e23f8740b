// dmpc: operator entry point for the data market.
//
//   dmpc run      run Protocol 1 (he) or Protocol 2 (gc) on ld or lr
//   dmpc gen-data synthetic haplotype counts or LR feature rows
//   dmpc keygen   BFV key material to files
//   dmpc inspect  gate statistics of a circuit file or a builtin circuit
//   dmpc bench    benchmark sweeps over M, N or range_bits
//
// Exit codes: 0 ok, 1 verification failure, 2 configuration rejected,
// 3 I/O, parse, transport or protocol failure.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "dmpc/circuit/builders.hpp"
#include "dmpc/circuit/text_format.hpp"
#include "dmpc/he/serialize.hpp"
#include "dmpc/market/inputs.hpp"
#include "dmpc/market/session.hpp"
#include "report.hpp"

#ifndef DMPC_DATA_DIR
#define DMPC_DATA_DIR "data"
#endif

using namespace dmpc;
using namespace dmpc::market;
using dmpc::tools::Format;
using dmpc::tools::Report;
using dmpc::tools::fmt_mb;
using dmpc::tools::fmt_ms;
using nlohmann::json;

namespace {

class VerificationFailure : public Error {
 public:
  using Error::Error;
};

struct Global {
  std::uint64_t seed = 1;
  unsigned repeat = 10;
  bool verify = true;
  std::string transport = "inproc";
  std::string host = "127.0.0.1";
  std::string format = "both";
};

// Parameters shared by run, inspect and bench (the RunConfig of the CLI).
struct RunConfig {
  std::string backend = "gc";
  std::string workload = "ld";
  std::uint32_t M = 10;
  std::uint32_t makers = 0;  // 0: two for ld, one for lr
  std::uint32_t count_bits = 11;
  std::uint64_t n_max = 1600;
  std::string threshold = "3841/1000";
  std::uint32_t range_bits = 12;
  std::string table_out = "64,62";
  std::uint32_t ring_degree = 4096;
  std::string encoding = "batched";
  bool batch = false;
  std::string data;
  std::string model;
  std::uint32_t rows = 0;  // 0: every row of the sample file
  std::uint32_t rows_per_session = 8;
  std::string transcript;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

Format parse_format(const std::string& s) {
  if (s == "table") return Format::Table;
  if (s == "jsonl") return Format::Jsonl;
  return Format::Both;
}

TransportKind parse_transport(const std::string& s) { return s == "tcp" ? TransportKind::Tcp : TransportKind::InProcess; }

analytics::LdThreshold parse_threshold(const std::string& s) {
  const auto slash = s.find('/');
  analytics::LdThreshold t;
  try {
    std::size_t p1 = 0, p2 = 0;
    if (slash == std::string::npos) {
      t.num = std::stoull(s, &p1);
      t.den = 1;
      p2 = 0;
      if (p1 != s.size()) throw std::invalid_argument("trailing");
    } else {
      t.num = std::stoull(s.substr(0, slash), &p1);
      t.den = std::stoull(s.substr(slash + 1), &p2);
      if (p1 != slash || p2 != s.size() - slash - 1) throw std::invalid_argument("trailing");
    }
  } catch (const std::exception&) {
    throw ConfigError("threshold '" + s + "' is not an exact rational num/den");
  }
  t.validate();
  return t;
}

circuit::FixedPointSpec parse_spec(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("fixed-point spec '" + s + "' must be total,frac");
  try {
    return circuit::FixedPointSpec(static_cast<std::uint32_t>(std::stoul(s.substr(0, comma))),
                                   static_cast<std::uint32_t>(std::stoul(s.substr(comma + 1))));
  } catch (const std::logic_error&) {
    throw ConfigError("fixed-point spec '" + s + "' must be total,frac");
  }
}

std::string data_path(const std::string& given, const char* fallback) {
  return given.empty() ? std::string(DMPC_DATA_DIR) + "/" + fallback : given;
}

std::shared_ptr<const analytics::LrModel> load_model(const RunConfig& rc) {
  return std::make_shared<const analytics::LrModel>(analytics::read_lr_model(data_path(rc.model, "lr_model.txt")));
}

Computation make_computation(const RunConfig& rc) {
  Computation c;
  if (rc.workload == "ld") {
    c.workload = Workload::Ld;
    c.instances = rc.M;
    c.count_bits = rc.count_bits;
    c.threshold = parse_threshold(rc.threshold);
    c.n_max = rc.n_max;
  } else {
    c.workload = Workload::Lr;
    c.model = load_model(rc);
    c.range_bits = rc.range_bits;
    c.table_out = parse_spec(rc.table_out);
    c.instances = rc.rows_per_session;
  }
  c.ring_degree = rc.ring_degree;
  c.encoding = rc.encoding == "scalar" ? he::Encoding::Scalar : he::Encoding::Batched;
  return c;
}

std::vector<MakerInput> ld_inputs(const Global& g, const RunConfig& rc) {
  if (rc.count_bits < 64 && rc.n_max > (1ULL << rc.count_bits) - 1)
    throw WidthError("n_max " + std::to_string(rc.n_max) + " exceeds what count_bits " + std::to_string(rc.count_bits) + " can carry");
  Prg prg(g.seed, 0x494e505554ULL);
  if (rc.data.empty()) return random_ld_inputs(rc.M, rc.makers, rc.n_max, prg);
  auto rows = analytics::read_haplotype_csv(rc.data);
  if (rows.size() < rc.M) throw ConfigError(rc.data + " holds " + std::to_string(rows.size()) + " rows, M is " + std::to_string(rc.M));
  rows.resize(rc.M);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].N() > rc.n_max)
      throw ConfigError(rc.data + " row " + std::to_string(i + 1) + " has N=" + std::to_string(rows[i].N()) + " above n_max");
  return split_ld(rows, rc.makers, prg);
}

SessionOutcome run_one(ProtocolKind p, const Computation& c, const std::vector<MakerInput>& in, const Global& g, std::uint64_t session) {
  SessionOptions o;
  o.transport = parse_transport(g.transport);
  o.session_id = session;
  o.seed = g.seed + session;
  o.host = g.host;
  return p == ProtocolKind::Gc ? run_protocol2(c, in, o) : run_protocol1(c, in, o);
}

void verify_values(const Global& g, const std::vector<std::int64_t>& expect, const std::vector<std::int64_t>& got, const std::string& what,
                   std::size_t first_index = 0) {
  if (!g.verify) return;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < std::max(expect.size(), got.size()); ++i) {
    const bool ok = i < expect.size() && i < got.size() && expect[i] == got[i];
    if (ok) continue;
    if (++bad <= 10)
      std::cerr << "mismatch: " << what << " instance " << first_index + i << ": oracle "
                << (i < expect.size() ? std::to_string(expect[i]) : "-") << ", protocol " << (i < got.size() ? std::to_string(got[i]) : "-") << '\n';
  }
  if (bad) throw VerificationFailure(what + ": " + std::to_string(bad) + " result(s) differ from the plaintext oracle");
}

// Sums of per-session measurements across repeats.
struct Totals {
  double wall = 0, keygen = 0, encrypt = 0, he_eval = 0, decrypt = 0, garble = 0, gc_eval = 0, labels = 0;
  std::uint64_t sessions = 0;

  void add(const SessionMetrics& m, double wall_ms) {
    wall += wall_ms;
    keygen += m.keygen_ms;
    encrypt += m.encrypt_ms;
    he_eval += m.he_eval_ms;
    decrypt += m.decrypt_ms;
    garble += m.garble_ms;
    gc_eval += m.gc_eval_ms;
    labels += m.label_ms;
    ++sessions;
  }

  json timing(double div) const {
    return json{{"wall", wall / div},       {"keygen", keygen / div},   {"encrypt", encrypt / div}, {"he_eval", he_eval / div},
                {"decrypt", decrypt / div}, {"labels", labels / div},   {"garble", garble / div},   {"gc_eval", gc_eval / div}};
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  return f;
}

// ---------------------------------------------------------------- run: LD

struct LdRun {
  Totals totals;
  SessionOutcome last;
  std::vector<std::int64_t> values;
};

LdRun run_ld_sessions(ProtocolKind p, const Computation& c, const std::vector<MakerInput>& in, const Global& g, std::ostream* transcript) {
  LdRun r;
  const auto expect = g.verify ? oracle(c, in) : std::vector<std::int64_t>{};
  for (unsigned rep = 0; rep < g.repeat; ++rep) {
    const auto t0 = Clock::now();
    auto out = run_one(p, c, in, g, rep + 1);
    r.totals.add(out.metrics, ms_since(t0));
    verify_values(g, expect, out.values, c.id());
    if (transcript && rep == 0) out.transcript.write_jsonl(*transcript, rep + 1);
    r.values = out.values;
    r.last = std::move(out);
  }
  return r;
}

json base_record(const char* cmd, const RunConfig& rc, const Global& g) {
  return json{{"command", cmd}, {"backend", rc.backend}, {"workload", rc.workload}, {"transport", g.transport}, {"seed", g.seed},
              {"repeat", g.repeat}, {"verified", g.verify}};
}

void ld_gc_row(Report& rep, const Computation& c, const RunConfig& rc, const Global& g, const LdRun& r) {
  const auto& m = r.last.metrics;
  const double n = static_cast<double>(r.totals.sessions);
  const auto comm = r.last.transcript.gc_comm_bytes();
  json rec = base_record("run", rc, g);
  rec.update({{"M", c.instances},
              {"N", c.n_max},
              {"makers", rc.makers},
              {"count_bits", c.count_bits},
              {"gates", m.gates.total},
              {"non_xor", m.gates.non_xor},
              {"garbled_bytes", m.garbled_bytes},
              {"comm_bytes", comm},
              {"total_bytes", r.last.transcript.total_bytes()},
              {"messages", r.last.transcript.size()},
              {"decisions", r.values},
              {"timing_ms", r.totals.timing(n)}});
  rep.add({std::to_string(c.instances), std::to_string(c.n_max), fmt_ms(r.totals.garble / n), fmt_ms(r.totals.gc_eval / n),
           std::to_string(m.gates.total), std::to_string(m.gates.non_xor), fmt_mb(comm), std::to_string(comm)},
          std::move(rec));
}

Report ld_gc_report() {
  return Report("LD test, garbled circuit (Protocol 2)", {"M", "N", "garbling ms", "evaluation ms", "#gates", "#non-XOR", "Comm MB", "Comm bytes"});
}

Report ld_he_report() {
  return Report("LD test, homomorphic encryption (Protocol 1)",
                {"M", "N", "encoding", "sessions", "keygen ms", "encrypt ms", "eval ms", "decrypt ms", "execution ms", "ms/test", "Space bytes"});
}

void ld_he_row(Report& rep, const Computation& c, const RunConfig& rc, const Global& g, const Totals& t, std::uint64_t space,
               std::uint32_t sessions_per_run, const std::vector<std::int64_t>& values) {
  const double runs = static_cast<double>(t.sessions) / sessions_per_run;
  const double exec = t.wall / runs;
  const std::uint32_t tests = rc.M;
  const std::string encoding = c.encoding == he::Encoding::Batched ? "batched" : "scalar";
  json rec = base_record("run", rc, g);
  rec.update({{"M", tests},
              {"N", c.n_max},
              {"encoding", encoding},
              {"sessions", sessions_per_run},
              {"space_bytes", space},
              {"ring_degree", c.ring_degree},
              {"decisions", values},
              {"timing_ms", t.timing(runs)}});
  rec["timing_ms"]["per_test"] = exec / tests;
  rep.add({std::to_string(tests), std::to_string(c.n_max), encoding, std::to_string(sessions_per_run),
           fmt_ms(t.keygen / runs), fmt_ms(t.encrypt / runs), fmt_ms(t.he_eval / runs), fmt_ms(t.decrypt / runs), fmt_ms(exec),
           fmt_ms(exec / tests), std::to_string(space)},
          std::move(rec));
}

// Scalar baseline: one single-instance session per test.
struct ScalarRun {
  Totals totals;
  std::uint64_t space = 0;
  std::vector<std::int64_t> values;
};

ScalarRun run_ld_scalar(Computation c, const std::vector<MakerInput>& in, const Global& g) {
  ScalarRun s;
  c.encoding = he::Encoding::Scalar;
  c.instances = 1;
  const std::uint32_t tests = static_cast<std::uint32_t>(in.at(0).ld.size());
  for (unsigned rep = 0; rep < g.repeat; ++rep) {
    s.values.clear();
    s.space = 0;
    for (std::uint32_t i = 0; i < tests; ++i) {
      std::vector<MakerInput> one(in.size());
      for (std::size_t j = 0; j < in.size(); ++j) one[j].ld = {in[j].ld[i]};
      const auto t0 = Clock::now();
      auto out = run_one(ProtocolKind::He, c, one, g, 1 + rep * tests + i);
      s.totals.add(out.metrics, ms_since(t0));
      s.space += out.transcript.bytes_of(MsgType::EncryptedListing);
      verify_values(g, oracle(c, one), out.values, "ld-test (scalar)", i);
      s.values.push_back(out.values.at(0));
    }
  }
  return s;
}

Report cmd_run_ld(const Global& g, const RunConfig& rc, std::ostream* transcript) {
  const Computation c = make_computation(rc);
  const auto in = ld_inputs(g, rc);
  if (rc.backend == "gc") {
    Report rep = ld_gc_report();
    ld_gc_row(rep, c, rc, g, run_ld_sessions(ProtocolKind::Gc, c, in, g, transcript));
    return rep;
  }
  Report rep = ld_he_report();
  if (!rc.batch) {
    const auto r = run_ld_sessions(ProtocolKind::He, c, in, g, transcript);
    ld_he_row(rep, c, rc, g, r.totals, r.last.transcript.bytes_of(MsgType::EncryptedListing), 1, r.values);
    return rep;
  }
  Computation batched = c;
  batched.encoding = he::Encoding::Batched;
  const auto b = run_ld_sessions(ProtocolKind::He, batched, in, g, transcript);
  const auto s = run_ld_scalar(c, in, g);
  Computation scalar = c;
  scalar.encoding = he::Encoding::Scalar;
  ld_he_row(rep, scalar, rc, g, s.totals, s.space, rc.M, s.values);
  ld_he_row(rep, batched, rc, g, b.totals, b.last.transcript.bytes_of(MsgType::EncryptedListing), 1, b.values);
  const double runs_b = b.totals.sessions, runs_s = static_cast<double>(s.totals.sessions) / rc.M;
  const double per_b = b.totals.wall / runs_b / rc.M, per_s = s.totals.wall / runs_s / rc.M;
  rep.note("batched and scalar decisions " + std::string(b.values == s.values ? "identical" : "DIFFER"));
  rep.note("amortized ms/test: batched " + fmt_ms(per_b) + ", scalar " + fmt_ms(per_s) + " (speedup " + fmt_ms(per_s / per_b) + "x)");
  if (g.verify && b.values != s.values) throw VerificationFailure("batched and scalar decisions differ");
  return rep;
}

// ---------------------------------------------------------------- run: LR

Report lr_report(const std::string& backend) {
  if (backend == "gc")
    return Report("LR prediction, garbled circuit (Protocol 2), per row",
                  {"range", "rows", "garbling ms", "evaluation ms", "#gates", "#non-XOR", "Comm bytes", "accuracy"});
  return Report("LR prediction, homomorphic encryption (Protocol 1), per row",
                {"range", "rows", "encoding", "encrypt ms", "eval ms", "decrypt ms", "execution ms", "Space bytes", "accuracy"});
}

Report cmd_run_lr(const Global& g, const RunConfig& rc, std::ostream* transcript) {
  if (rc.makers != 1) throw ConfigError("lr-predict takes its feature rows from exactly one maker (got --makers " + std::to_string(rc.makers) + ")");
  if (rc.rows_per_session < 1) throw ConfigError("rows-per-session must be at least 1");
  Computation base = make_computation(rc);
  const auto samples = analytics::read_lr_samples(data_path(rc.data, "breast_cancer.csv"));
  const std::size_t rows = rc.rows ? rc.rows : samples.rows.size();
  if (rows > samples.rows.size()) throw ConfigError("--rows " + std::to_string(rows) + " exceeds the " + std::to_string(samples.rows.size()) + " sample rows");
  const ProtocolKind p = rc.backend == "gc" ? ProtocolKind::Gc : ProtocolKind::He;

  Totals t;
  std::uint64_t comm = 0, space = 0;
  std::vector<std::int64_t> probs;
  std::uint64_t session = 0;
  for (unsigned rep = 0; rep < g.repeat; ++rep) {
    probs.clear();
    for (std::size_t first = 0; first < rows; first += rc.rows_per_session) {
      Computation c = base;
      c.instances = static_cast<std::uint32_t>(std::min<std::size_t>(rc.rows_per_session, rows - first));
      const std::vector<MakerInput> in{lr_rows(*c.model, samples, first, c.instances)};
      const auto t0 = Clock::now();
      auto out = run_one(p, c, in, g, ++session);
      t.add(out.metrics, ms_since(t0));
      if (g.verify) verify_values(g, oracle(c, in), out.values, "lr-predict", first);
      if (rep == 0) {
        comm += out.transcript.gc_comm_bytes();
        space += out.transcript.bytes_of(MsgType::EncryptedListing);
        if (transcript) out.transcript.write_jsonl(*transcript, session);
      }
      probs.insert(probs.end(), out.values.begin(), out.values.end());
    }
  }

  std::string accuracy = "-";
  double acc = -1;
  if (samples.labels.size() >= rows) {
    std::size_t right = 0;
    for (std::size_t i = 0; i < rows; ++i) right += (base.table_out.decode(probs[i]) >= 0.5) == (samples.labels[i] == 1);
    acc = static_cast<double>(right) / static_cast<double>(rows);
    accuracy = fmt_ms(100.0 * acc) + "%";
  }
  const double per = static_cast<double>(rows) * g.repeat;
  Computation one = base;
  one.instances = 1;
  const auto stats = circuit_for(one, 1)->stats();

  json rec = base_record("run", rc, g);
  rec.update({{"range_bits", base.range_bits}, {"rows", rows}, {"rows_per_session", rc.rows_per_session}, {"timing_ms", t.timing(per)}});
  if (acc >= 0) rec["accuracy"] = acc;
  std::vector<double> decoded;
  for (auto v : probs) decoded.push_back(base.table_out.decode(v));
  rec["probabilities"] = decoded;
  Report rep = lr_report(rc.backend);
  if (p == ProtocolKind::Gc) {
    rec.update({{"gates_per_row", stats.total}, {"non_xor_per_row", stats.non_xor}, {"comm_bytes_per_row", comm / rows}, {"comm_bytes", comm}});
    rep.add({std::to_string(base.range_bits), std::to_string(rows), fmt_ms(t.garble / per), fmt_ms(t.gc_eval / per),
             std::to_string(stats.total), std::to_string(stats.non_xor), std::to_string(comm / rows), accuracy},
            std::move(rec));
    rep.note("#gates and #non-XOR are for the single-row circuit; sessions carry " + std::to_string(rc.rows_per_session) + " rows");
  } else {
    rec.update({{"encoding", rc.encoding}, {"space_bytes", space}});
    rep.add({std::to_string(base.range_bits), std::to_string(rows), rc.encoding, fmt_ms(t.encrypt / per), fmt_ms(t.he_eval / per),
             fmt_ms(t.decrypt / per), fmt_ms(t.wall / per), std::to_string(space), accuracy},
            std::move(rec));
  }
  return rep;
}

void cmd_run(const Global& g, const RunConfig& rc) {
  std::optional<std::ofstream> tf;
  if (!rc.transcript.empty()) tf = open_out(rc.transcript);
  const Report rep = rc.workload == "ld" ? cmd_run_ld(g, rc, tf ? &*tf : nullptr) : cmd_run_lr(g, rc, tf ? &*tf : nullptr);
  rep.print(std::cout, parse_format(g.format));
}

// ---------------------------------------------------------------- gen-data

struct GenOptions {
  std::string kind = "haplotypes";
  double D = 0;
  std::uint64_t n = 1000;
  std::uint32_t rows = 0;  // 0: 10 haplotype rows or 569 sample rows
  std::uint32_t dims = 30;
  std::string out;
};

void cmd_gen_data(const Global& g, const GenOptions& o) {
  Prg prg(g.seed, 0x47454e44415441ULL);
  std::ostringstream body;
  if (o.kind == "haplotypes") {
    std::vector<analytics::HaplotypeCounts> rows;
    for (std::uint32_t i = 0; i < (o.rows ? o.rows : 10); ++i) rows.push_back(analytics::generate_haplotype_counts(prg, o.n, o.D));
    analytics::write_haplotype_csv(body, rows);
  } else {
    if (o.dims < 1) throw ConfigError("--dims must be at least 1");
    analytics::write_lr_samples(body, analytics::generate_lr_samples(prg, o.rows ? o.rows : 569, o.dims));
  }
  if (o.out.empty() || o.out == "-") {
    std::cout << body.str();
    return;
  }
  auto f = open_out(o.out);
  f << body.str();
  if (!f) throw Error("write to " + o.out + " failed");
  std::cerr << "wrote " << o.out << '\n';
}

// ---------------------------------------------------------------- keygen

void cmd_keygen(const Global& g, const RunConfig& rc, const std::string& dir) {
  const auto ring = ring_for(rc.ring_degree);
  Prg prg(g.seed, 0x4b455947454eULL);
  const auto t0 = Clock::now();
  const auto keys = he::keygen(*ring, prg);
  const double ms = ms_since(t0);
  std::filesystem::create_directories(dir);
  Report rep("BFV key generation", {"file", "bytes"});
  const std::pair<const char*, Bytes> files[] = {{"pk.bin", he::serialize(keys.pk)}, {"rk.bin", he::serialize(keys.rk)}, {"sk.bin", he::serialize(keys.sk)}};
  for (const auto& [name, bytes] : files) {
    const auto path = (std::filesystem::path(dir) / name).string();
    auto f = open_out(path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write to " + path + " failed");
    rep.add({path, std::to_string(bytes.size())},
            json{{"command", "keygen"}, {"file", path}, {"bytes", bytes.size()}, {"ring_degree", rc.ring_degree}, {"timing_ms", {{"keygen", ms}}}});
  }
  rep.note(ring->params().describe());
  rep.print(std::cout, parse_format(g.format));
}

// ---------------------------------------------------------------- inspect

circuit::Circuit builtin_circuit(const std::string& name, std::uint32_t width, const RunConfig& rc) {
  if (name == "adder") return circuit::build_adder(width);
  if (name == "multiplier") return circuit::build_multiplier(width);
  if (name == "comparator") return circuit::build_greater_than(width);
  if (name == "xor") {
    circuit::CircuitBuilder cb;
    const auto x = cb.input("x", 0, width), y = cb.input("y", 1, width);
    circuit::Bits z;
    for (std::uint32_t i = 0; i < width; ++i) z.push_back(cb.XOR(x[i], y[i]));
    cb.output("z", z);
    return cb.build();
  }
  if (name == "ld" || name == "lr") {
    RunConfig r = rc;
    r.workload = name;
    Computation c = make_computation(r);
    if (name == "lr") c.instances = 1;
    return *circuit_for(c, name == "lr" ? 1 : rc.makers);
  }
  throw ConfigError("unknown builtin circuit '" + name + "' (adder, multiplier, comparator, xor, ld, lr)");
}

void cmd_inspect(const Global& g, const RunConfig& rc, const std::string& file, const std::string& builtin, std::uint32_t width,
                 const std::string& write_to) {
  if (file.empty() == builtin.empty()) throw ConfigError("inspect takes either a circuit file or --builtin");
  circuit::Circuit c = [&] {
    if (!builtin.empty()) return builtin_circuit(builtin, width, rc);
    std::ifstream f(file);
    if (!f) throw Error("cannot open " + file);
    return circuit::read_text(f);
  }();
  if (!write_to.empty()) {
    auto f = open_out(write_to);
    f << circuit::write_text(c);
  }
  const auto s = c.stats();
  std::uint64_t in_bits = 0, const_bits = 0;
  for (const auto& p : c.party_groups()) in_bits += p.width;
  for (const auto& k : c.constant_groups()) const_bits += k.width();
  const std::uint64_t predicted = gc::GarbledCircuit::kHeaderBytes + 32 * s.non_xor;
  const std::string name = builtin.empty() ? file : builtin;
  Report rep("circuit statistics", {"circuit", "#gates", "#non-XOR", "#XOR", "#INV", "input bits", "constant bits", "output bits", "garbled bytes"});
  rep.add({name, std::to_string(s.total), std::to_string(s.non_xor), std::to_string(s.xor_gates), std::to_string(s.inv_gates),
           std::to_string(in_bits), std::to_string(const_bits), std::to_string(c.n_outputs()), std::to_string(predicted)},
          json{{"command", "inspect"}, {"circuit", name}, {"gates", s.total}, {"non_xor", s.non_xor}, {"xor", s.xor_gates}, {"inv", s.inv_gates},
               {"input_bits", in_bits}, {"constant_bits", const_bits}, {"output_bits", c.n_outputs()}, {"party_groups", c.party_groups().size()},
               {"predicted_garbled_bytes", predicted}, {"structure_hash", to_hex(c.structure_hash())}});
  rep.note("garbled bytes = " + std::to_string(gc::GarbledCircuit::kHeaderBytes) + "-byte header + 32 bytes per non-XOR gate");
  rep.print(std::cout, parse_format(g.format));
}

// ---------------------------------------------------------------- bench

std::uint32_t bits_for(std::uint64_t n) {
  std::uint32_t b = 0;
  while (n >> b) ++b;
  return std::max<std::uint32_t>(b, 1);
}

void cmd_bench(const Global& g, RunConfig rc, int table, const std::vector<std::uint32_t>& ms, const std::vector<std::uint64_t>& ns,
               const std::vector<std::uint32_t>& ranges) {
  const Format fmt = parse_format(g.format);
  if (table == 1) {
    Report rep = ld_gc_report();
    for (auto m : ms)
      for (auto n : ns) {
        RunConfig r = rc;
        r.workload = "ld";
        r.backend = "gc";
        r.makers = rc.workload == "lr" ? 2 : rc.makers;
        r.M = m;
        r.n_max = n;
        r.count_bits = bits_for(n);
        const Computation c = make_computation(r);
        ld_gc_row(rep, c, r, g, run_ld_sessions(ProtocolKind::Gc, c, ld_inputs(g, r), g, nullptr));
        std::cerr << "table 1: M=" << m << " N=" << n << " done\n";
      }
    rep.note("N selects count_bits = bit length of N; timings are means over " + std::to_string(g.repeat) + " runs and not deterministic");
    rep.print(std::cout, fmt);
  } else if (table == 2) {
    Report rep("LD test, homomorphic encryption (Protocol 1)", {"M", "Execution ms", "Space bytes", "Expected execution (batch) ms"});
    for (auto m : ms) {
      RunConfig r = rc;
      r.workload = "ld";
      r.backend = "he";
      r.makers = rc.workload == "lr" ? 2 : rc.makers;
      r.M = m;
      const Computation c = make_computation(r);
      const auto in = ld_inputs(g, r);
      const auto s = run_ld_scalar(c, in, g);
      Computation b = c;
      b.encoding = he::Encoding::Batched;
      const auto br = run_ld_sessions(ProtocolKind::He, b, in, g, nullptr);
      if (g.verify && br.values != s.values) throw VerificationFailure("batched and scalar decisions differ at M=" + std::to_string(m));
      const double exec_s = s.totals.wall / g.repeat, exec_b = br.totals.wall / g.repeat;
      const auto space = s.space;
      json rec = base_record("bench", r, g);
      rec.update({{"table", 2}, {"M", m}, {"space_bytes", space}, {"batched_space_bytes", br.last.transcript.bytes_of(MsgType::EncryptedListing)},
                  {"decisions", s.values}, {"timing_ms", {{"scalar", exec_s}, {"batched", exec_b}}}});
      rep.add({std::to_string(m), fmt_ms(exec_s), std::to_string(space), fmt_ms(exec_b)}, std::move(rec));
      std::cerr << "table 2: M=" << m << " done\n";
    }
    rep.note("Execution: M single-test scalar sessions; batch: one slot-packed session of M tests");
    rep.print(std::cout, fmt);
  } else if (table == 3) {
    Report rep("LR prediction, garbled circuit (Protocol 2), one row per session",
               {"range", "garbling ms", "evaluation ms", "#gates", "#non-XOR", "Comm bytes"});
    const auto samples = analytics::read_lr_samples(data_path(rc.data, "breast_cancer.csv"));
    for (auto rb : ranges) {
      RunConfig r = rc;
      r.workload = "lr";
      r.backend = "gc";
      r.range_bits = rb;
      r.rows_per_session = 1;
      r.makers = 1;
      const Computation c = make_computation(r);
      Totals t;
      SessionOutcome last;
      for (unsigned rep_i = 0; rep_i < g.repeat; ++rep_i) {
        const std::vector<MakerInput> in{lr_rows(*c.model, samples, rep_i % samples.rows.size(), 1)};
        const auto t0 = Clock::now();
        last = run_one(ProtocolKind::Gc, c, in, g, rep_i + 1);
        t.add(last.metrics, ms_since(t0));
        verify_values(g, oracle(c, in), last.values, "lr-predict", rep_i);
      }
      const auto& st = last.metrics.gates;
      const auto comm = last.transcript.gc_comm_bytes();
      json rec = base_record("bench", r, g);
      rec.update({{"table", 3}, {"range_bits", rb}, {"gates", st.total}, {"non_xor", st.non_xor}, {"comm_bytes", comm}, {"timing_ms", t.timing(g.repeat)}});
      rep.add({std::to_string(rb), fmt_ms(t.garble / g.repeat), fmt_ms(t.gc_eval / g.repeat), std::to_string(st.total), std::to_string(st.non_xor),
               std::to_string(comm)},
              std::move(rec));
      std::cerr << "table 3: range_bits=" << rb << " done\n";
    }
    rep.print(std::cout, fmt);
  } else {
    throw ConfigError("--table must be 1, 2 or 3");
  }
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const VerificationFailure*>(&e) || dynamic_cast<const DecryptionFailure*>(&e)) return 1;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const BudgetExhausted*>(&e) || dynamic_cast<const UndefinedStatistic*>(&e)) return 2;
  return 3;
}

const char* exit_label(int code) {
  switch (code) {
    case 1: return "verification failure";
    case 2: return "configuration rejected";
    default: return "error";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data market with a garbled-circuit and a homomorphic backend"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; flags on the command line take precedence");

  Global g;
  RunConfig rc;
  app.add_option("--seed", g.seed, "Seed for data, keys and garbling")->capture_default_str();
  app.add_option("--repeat", g.repeat, "Runs per measurement; reports the mean")->capture_default_str()->check(CLI::Range(1u, 100000u));
  app.add_flag("--verify,!--no-verify", g.verify, "Check results against the plaintext oracle (default on)");
  app.add_option("--transport", g.transport, "inproc or tcp")->capture_default_str()->check(CLI::IsMember({"inproc", "tcp"}));
  app.add_option("--host", g.host, "Loopback address for --transport tcp")->capture_default_str();
  app.add_option("--format", g.format, "table, jsonl or both")->capture_default_str()->check(CLI::IsMember({"table", "jsonl", "both"}));

  // Computation parameters, accepted by run, inspect, keygen and bench.
  auto params = [&](CLI::App* sub) {
    sub->add_option("--backend", rc.backend, "gc (Protocol 2) or he (Protocol 1)")->capture_default_str()->check(CLI::IsMember({"gc", "he"}));
    sub->add_option("--workload", rc.workload, "ld or lr")->capture_default_str()->check(CLI::IsMember({"ld", "lr"}));
    sub->add_option("--M", rc.M, "LD tests per session")->capture_default_str()->check(CLI::Range(1u, 100000u));
    sub->add_option("--makers", rc.makers, "Data makers (default 2 for ld, 1 for lr)")->check(CLI::Range(1u, 64u));
    sub->add_option("--count-bits", rc.count_bits, "Width of each maker count")->capture_default_str();
    sub->add_option("--n-max", rc.n_max, "Largest total N of an LD test")->capture_default_str();
    sub->add_option("--threshold", rc.threshold, "Chi-square threshold as num/den")->capture_default_str();
    sub->add_option("--range-bits", rc.range_bits, "Sigmoid lookup index bits")->capture_default_str();
    sub->add_option("--table-out", rc.table_out, "Sigmoid output fixed point total,frac")->capture_default_str();
    sub->add_option("--ring-degree", rc.ring_degree, "BFV ring degree")->capture_default_str();
    sub->add_option("--encoding", rc.encoding, "HE encoding")->capture_default_str()->check(CLI::IsMember({"batched", "scalar"}));
    sub->add_option("--data", rc.data, "Haplotype CSV (ld) or sample CSV (lr)");
    sub->add_option("--model", rc.model, "LR model file");
    sub->add_option("--rows", rc.rows, "LR rows to predict (0: all)")->capture_default_str();
    sub->add_option("--rows-per-session", rc.rows_per_session, "LR rows per garbled circuit or listing")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "Run a protocol end to end and report");
  params(run);
  run->add_flag("--batch", rc.batch, "HE LD: compare slot batching with scalar sessions");
  run->add_option("--transcript", rc.transcript, "Write the first run's transcript as JSON lines");

  GenOptions gen;
  auto* gd = app.add_subcommand("gen-data", "Generate deterministic synthetic fixtures");
  gd->add_option("--kind", gen.kind, "haplotypes or lr-samples")->capture_default_str()->check(CLI::IsMember({"haplotypes", "lr-samples"}));
  gd->add_option("--D", gen.D, "Target linkage coefficient D; 0 gives exact equilibrium")->capture_default_str();
  gd->add_option("--n", gen.n, "Haplotype total per row")->capture_default_str();
  gd->add_option("--rows", gen.rows, "Rows (default 10 haplotype rows, 569 samples)");
  gd->add_option("--dims", gen.dims, "Sample dimensions")->capture_default_str();
  gd->add_option("--out", gen.out, "Output file (default stdout)");

  std::string key_dir = "keys";
  auto* kg = app.add_subcommand("keygen", "Generate BFV keys (pk.bin, rk.bin, sk.bin)");
  params(kg);
  kg->add_option("--out-dir", key_dir, "Output directory")->capture_default_str();

  std::string file, builtin, write_to;
  std::uint32_t width = 8;
  auto* ins = app.add_subcommand("inspect", "Gate statistics and predicted garbled size");
  params(ins);
  ins->add_option("file", file, "Circuit text file");
  ins->add_option("--builtin", builtin, "adder, multiplier, comparator, xor, ld or lr");
  ins->add_option("--width", width, "Operand width for adder, multiplier, comparator and xor")->capture_default_str();
  ins->add_option("--write", write_to, "Also write the circuit in text form");

  int table = 1;
  std::vector<std::uint32_t> m_list{10, 100};
  std::vector<std::uint64_t> n_list{200, 400, 800, 1600};
  std::vector<std::uint32_t> range_list{10, 11, 12};
  auto* bench = app.add_subcommand("bench", "Benchmark sweeps: 1 LD garbled circuit, 2 LD homomorphic, 3 LR lookup range");
  params(bench);
  bench->add_option("--table", table, "1: LD garbled circuit, 2: LD homomorphic, 3: LR lookup ranges")->capture_default_str();
  bench->add_option("--M-list", m_list, "M values")->delimiter(',')->capture_default_str();
  bench->add_option("--N-list", n_list, "N values (table 1)")->delimiter(',')->capture_default_str();
  bench->add_option("--range-list", range_list, "range_bits values (table 3)")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (rc.makers == 0) rc.makers = rc.workload == "lr" ? 1 : 2;

  try {
    if (*run) cmd_run(g, rc);
    else if (*gd) cmd_gen_data(g, gen);
    else if (*kg) cmd_keygen(g, rc, key_dir);
    else if (*ins) cmd_inspect(g, rc, file, builtin, width, write_to);
    else if (*bench) cmd_bench(g, rc, table, m_list, n_list, range_list);
  } catch (const std::exception& e) {
    const int code = exit_code(e);
    std::cerr << "dmpc: " << exit_label(code) << ": " << e.what() << '\n';
    return code;
  }
  return 0;
}
