#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dmpc/analytics/he_plans.hpp"
#include "dmpc/analytics/ld_circuit.hpp"
#include "dmpc/analytics/lr.hpp"

namespace dmpc::market {

enum class Workload { Ld, Lr };

// A registered computation with its public parameters. The LR model is part
// of the registration: the CSP and every buyer hold the same copy.
struct Computation {
  Workload workload = Workload::Ld;
  std::uint32_t instances = 1;  // LD tests or LR rows per session

  // LD
  std::uint32_t count_bits = 11;
  analytics::LdThreshold threshold{};
  std::uint64_t n_max = 1600;

  // LR
  std::shared_ptr<const analytics::LrModel> model;
  std::uint32_t range_bits = 12;
  circuit::FixedPointSpec table_out{64, 62};

  // HE (Protocol 1)
  std::uint32_t ring_degree = 4096;
  he::Encoding encoding = he::Encoding::Batched;

  std::string id() const { return workload == Workload::Ld ? "ld-test" : "lr-predict"; }

  // Canonical key=value text naming every public parameter; the Query
  // payload carries it and the CSP checks it against its registration.
  std::string describe(std::uint32_t makers) const {
    std::ostringstream o;
    o << "makers=" << makers << ";instances=" << instances;
    if (workload == Workload::Ld) {
      o << ";count_bits=" << count_bits << ";threshold=" << threshold.num << "/" << threshold.den << ";n_max=" << n_max;
    } else {
      o << ";range_bits=" << range_bits << ";table=" << table_out.total_bits << "," << table_out.frac_bits;
      if (model) o << ";model=" << to_hex(model_digest());
    }
    o << ";n=" << ring_degree << ";encoding=" << (encoding == he::Encoding::Batched ? "batched" : "scalar");
    return o.str();
  }

  Digest model_digest() const {
    ByteWriter w;
    w.u32(model->spec.total_bits);
    w.u32(model->spec.frac_bits);
    w.u64(static_cast<std::uint64_t>(model->bias));
    for (auto v : model->weights) w.u64(static_cast<std::uint64_t>(v));
    return sha256(w.take());
  }

  void validate(std::uint32_t makers) const {
    if (makers < 1) throw ConfigError("a session needs at least one maker");
    if (instances < 1) throw ConfigError("a session needs at least one instance");
    if (workload == Workload::Ld) {
      threshold.validate();
      analytics::LdCircuitSpec{count_bits, instances, threshold, makers}.validate();
    } else {
      if (!model) throw ConfigError("lr-predict needs a registered model");
      model->validate();
      if (makers != 1) throw ConfigError("lr-predict takes its feature rows from exactly one maker");
    }
  }

  analytics::SigmoidTable table() const { return analytics::build_sigmoid_table(table_out, range_bits); }
};

// Plaintext inputs of one maker.
struct MakerInput {
  std::vector<analytics::HaplotypeCounts> ld;
  std::vector<std::vector<std::int64_t>> lr_rows;  // raw fixed point
};

namespace detail {

template <class V>
class Cache {
 public:
  template <class F>
  std::shared_ptr<const V> get(const std::string& key, F make) {
    {
      std::lock_guard lk(mu_);
      if (auto it = map_.find(key); it != map_.end()) return it->second;
    }
    auto v = std::make_shared<const V>(make());
    std::lock_guard lk(mu_);
    if (map_.size() >= 8) map_.clear();
    return map_.emplace(key, std::move(v)).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const V>> map_;
};

}  // namespace detail

// The circuit C_f for a computation. Both the CSP and the buyer derive it
// from the registration; circuits are deterministic, so memoizing is safe.
inline std::shared_ptr<const circuit::Circuit> circuit_for(const Computation& c, std::uint32_t makers) {
  static detail::Cache<circuit::Circuit> cache;
  c.validate(makers);
  return cache.get(c.id() + "|" + c.describe(makers), [&] {
    if (c.workload == Workload::Ld)
      return analytics::build_ld_circuit(analytics::LdCircuitSpec{c.count_bits, c.instances, c.threshold, makers});
    return analytics::build_lr_circuit(*c.model, c.table(), c.instances);
  });
}

// What an evaluator knows of C_f: the same circuit with constant values zeroed.
inline std::shared_ptr<const circuit::Circuit> topology_for(const Computation& c, std::uint32_t makers) {
  static detail::Cache<circuit::Circuit> cache;
  auto full = circuit_for(c, makers);
  return cache.get(c.id() + "|" + c.describe(makers), [&] { return full->topology_only(); });
}

inline std::shared_ptr<const he::RingContext> ring_for(std::uint32_t degree) {
  static detail::Cache<he::RingContext> cache;
  return cache.get(std::to_string(degree), [&] { return he::RingContext(he::HeParams::defaults(degree)); });
}

// Public HE evaluation plan of a computation. Construction runs the depth and
// plaintext-space checks, so rejected plans fail before any message is sent.
class HePlan {
 public:
  HePlan(const Computation& c, std::uint32_t makers) : comp_(c) {
    c.validate(makers);
    auto ring = ring_for(c.ring_degree);
    if (c.workload == Workload::Ld) plan_.emplace<analytics::LdHePlan>(ring, c.threshold, c.n_max, makers);
    else plan_.emplace<analytics::LrHePlan>(ring, *c.model, c.table());
  }

  const analytics::HeSuite& suite() const {
    if (auto* ld = std::get_if<analytics::LdHePlan>(&plan_)) return ld->suite();
    return std::get<analytics::LrHePlan>(plan_).suite();
  }
  const he::RingContext& ring() const { return *suite().ring; }

  analytics::HeListing encrypt(const he::PublicKey& pk, const MakerInput& in, Prg& prg) const {
    if (auto* ld = std::get_if<analytics::LdHePlan>(&plan_)) {
      check_count(in.ld.size());
      return ld->encrypt(pk, in.ld, comp_.encoding, prg);
    }
    check_count(in.lr_rows.size());
    return std::get<analytics::LrHePlan>(plan_).encrypt(pk, in.lr_rows, comp_.encoding, prg);
  }

  // f' over the maker listings.
  analytics::HeListing evaluate(const std::vector<analytics::HeListing>& ls, const he::RelinKey& rk) const {
    if (auto* ld = std::get_if<analytics::LdHePlan>(&plan_)) return ld->evaluate(ls, rk);
    return std::get<analytics::LrHePlan>(plan_).evaluate(ls);
  }

  // Decrypts and finishes on the CSP: LD decisions (0/1) or LR probabilities.
  std::vector<std::int64_t> decrypt(const he::SecretKey& sk, const analytics::HeListing& result) const {
    std::vector<std::int64_t> out;
    if (auto* ld = std::get_if<analytics::LdHePlan>(&plan_)) {
      for (const auto& o : ld->decrypt(sk, result)) out.push_back(o.decision ? 1 : 0);
    } else {
      for (const auto& o : std::get<analytics::LrHePlan>(plan_).decrypt(sk, result)) out.push_back(o.probability);
    }
    if (out.size() != comp_.instances) throw ProtocolError("result instance count does not match the query");
    return out;
  }

 private:
  void check_count(std::size_t n) const {
    if (n != comp_.instances)
      throw ConfigError("maker input has " + std::to_string(n) + " instances, the computation expects " + std::to_string(comp_.instances));
  }

  Computation comp_;
  std::variant<std::monostate, analytics::LdHePlan, analytics::LrHePlan> plan_;
};

// Wires of maker `j`, in wire order.
inline std::vector<circuit::WireId> maker_wires(const circuit::Circuit& c, std::uint32_t j) {
  std::vector<circuit::WireId> w;
  circuit::WireId off = 0;
  for (const auto& g : c.party_groups()) {
    if (g.owner == j)
      for (std::uint32_t i = 0; i < g.width; ++i) w.push_back(off + i);
    off += g.width;
  }
  return w;
}

// Plaintext input bits of maker `j` matching maker_wires().
inline circuit::BitVector maker_bits(const Computation& c, std::uint32_t makers, const MakerInput& in) {
  if (c.workload == Workload::Ld)
    return analytics::ld_maker_bits(analytics::LdCircuitSpec{c.count_bits, c.instances, c.threshold, makers}, in.ld);
  if (in.lr_rows.size() != c.instances)
    throw ConfigError("maker holds " + std::to_string(in.lr_rows.size()) + " rows, the computation expects " + std::to_string(c.instances));
  circuit::BitVector bits;
  for (const auto& r : in.lr_rows) {
    auto b = analytics::lr_input_bits(*c.model, r);
    bits.insert(bits.end(), b.begin(), b.end());
  }
  return bits;
}

// Per-instance values from the decoded circuit outputs.
inline std::vector<std::int64_t> values_from_bits(const Computation& c, const circuit::BitVector& bits) {
  std::vector<std::int64_t> out;
  if (c.workload == Workload::Ld) {
    if (bits.size() != c.instances) throw ProtocolError("decision bit count does not match the query");
    for (auto b : bits) out.push_back(b ? 1 : 0);
    return out;
  }
  const auto t = c.table_out;
  if (bits.size() != static_cast<std::size_t>(c.instances) * t.total_bits) throw ProtocolError("probability bit count does not match the query");
  for (std::size_t r = 0; r < c.instances; ++r) out.push_back(t.from_pattern(circuit::from_bits(bits, r * t.total_bits, t.total_bits)));
  return out;
}

// Plaintext oracle over the union of maker inputs.
inline std::vector<std::int64_t> oracle(const Computation& c, const std::vector<MakerInput>& inputs) {
  std::vector<std::int64_t> out;
  if (c.workload == Workload::Ld) {
    for (std::size_t i = 0; i < c.instances; ++i) {
      analytics::HaplotypeCounts sum{};
      for (const auto& in : inputs) sum += in.ld.at(i);
      out.push_back(analytics::ld_decide_plain(sum, c.threshold).decision ? 1 : 0);
    }
    return out;
  }
  const auto t = c.table();
  for (const auto& row : inputs.at(0).lr_rows) out.push_back(analytics::lr_predict_plain(*c.model, t, row));
  return out;
}

}  // namespace dmpc::market
