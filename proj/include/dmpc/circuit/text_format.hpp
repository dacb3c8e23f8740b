#pragma once

#include <charconv>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dmpc/circuit/circuit.hpp"

// Gate-per-line text format:
//
//   <n_gates> <n_wires>
//   <n_party_groups> <width...>
//   <n_output_groups> <width...>
//   party <name> <owner> <width>            one per party group, in wire order
//   const <name> <width> <bits|*>           bits LSB first; `*` withholds values
//   output <name> <width> <wire ids...>
//   2 1 <a> <b> <out> XOR|AND
//   1 1 <a> <out> INV
//
// Lines starting with '#' and blank lines are ignored.
namespace dmpc::circuit {

inline std::string write_text(const Circuit& c, bool include_constants = true) {
  std::ostringstream os;
  os << c.gates().size() << ' ' << c.n_wires() << '\n';
  os << c.party_groups().size();
  for (const auto& p : c.party_groups()) os << ' ' << p.width;
  os << '\n' << c.output_groups().size();
  for (const auto& o : c.output_groups()) os << ' ' << o.wires.size();
  os << '\n';
  for (const auto& p : c.party_groups()) os << "party " << p.name << ' ' << p.owner << ' ' << p.width << '\n';
  for (const auto& k : c.constant_groups()) {
    os << "const " << k.name << ' ' << k.width() << ' ';
    if (include_constants) {
      for (auto v : k.values) os << static_cast<char>('0' + v);
      if (k.values.empty()) os << '-';
    } else {
      os << '*';
    }
    os << '\n';
  }
  for (const auto& o : c.output_groups()) {
    os << "output " << o.name << ' ' << o.wires.size();
    for (auto w : o.wires) os << ' ' << w;
    os << '\n';
  }
  for (const auto& g : c.gates()) {
    if (g.kind == GateKind::Inv) os << "1 1 " << g.a << ' ' << g.out << " INV\n";
    else os << "2 1 " << g.a << ' ' << g.b << ' ' << g.out << ' ' << to_string(g.kind) << '\n';
  }
  return os.str();
}

namespace detail {

class LineParser {
 public:
  explicit LineParser(std::istream& in) : in_(in) {}

  // Next non-blank, non-comment line split into tokens; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream ls(line);
      tokens.clear();
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (tokens.empty() || tokens[0][0] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("circuit text line " + std::to_string(line_no_) + ": " + msg);
  }

  std::uint64_t number(const std::string& tok, std::uint64_t max = UINT32_MAX) const {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size()) fail("expected a number, got '" + tok + "'");
    if (v > max) fail("number " + tok + " out of range");
    return v;
  }

  void expect_count(const std::vector<std::string>& t, std::size_t n, const char* what) const {
    if (t.size() != n) fail(std::string(what) + ": expected " + std::to_string(n) + " fields, got " + std::to_string(t.size()));
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace detail

inline Circuit read_text(std::istream& in) {
  detail::LineParser lp(in);
  std::vector<std::string> t;
  if (!lp.next(t)) lp.fail("missing header");
  lp.expect_count(t, 2, "header");
  const auto n_gates = lp.number(t[0]);
  const auto n_wires = lp.number(t[1]);

  if (!lp.next(t)) lp.fail("missing party-group line");
  const auto n_party = lp.number(t[0], 1u << 20);
  lp.expect_count(t, 1 + n_party, "party-group line");
  std::vector<std::uint64_t> party_widths;
  for (std::size_t i = 0; i < n_party; ++i) party_widths.push_back(lp.number(t[1 + i]));
  if (!lp.next(t)) lp.fail("missing output-group line");
  const auto n_out = lp.number(t[0], 1u << 20);
  lp.expect_count(t, 1 + n_out, "output-group line");
  std::vector<std::uint64_t> out_widths;
  for (std::size_t i = 0; i < n_out; ++i) out_widths.push_back(lp.number(t[1 + i]));

  std::vector<PartyGroup> parties;
  std::vector<ConstantGroup> constants;
  std::vector<OutputGroup> outputs;
  std::vector<Gate> gates;
  gates.reserve(n_gates);
  while (lp.next(t)) {
    const std::string& kw = t[0];
    if (kw == "party") {
      lp.expect_count(t, 4, "party");
      if (!constants.empty() || !outputs.empty() || !gates.empty()) lp.fail("party group after other sections");
      parties.push_back({t[1], static_cast<std::uint32_t>(lp.number(t[2])), static_cast<std::uint32_t>(lp.number(t[3]))});
    } else if (kw == "const") {
      lp.expect_count(t, 4, "const");
      if (!outputs.empty() || !gates.empty()) lp.fail("constant group after outputs or gates");
      const auto width = lp.number(t[2]);
      ConstantGroup g{t[1], BitVector(width, 0)};
      if (t[3] != "*" && !(width == 0 && t[3] == "-")) {
        if (t[3].size() != width) lp.fail("constant '" + t[1] + "' has " + std::to_string(t[3].size()) + " bits, declared " + t[2]);
        for (std::size_t i = 0; i < width; ++i) {
          if (t[3][i] != '0' && t[3][i] != '1') lp.fail("constant bits must be 0 or 1");
          g.values[i] = static_cast<std::uint8_t>(t[3][i] - '0');
        }
      }
      constants.push_back(std::move(g));
    } else if (kw == "output") {
      if (t.size() < 3) lp.fail("output: missing fields");
      if (!gates.empty()) lp.fail("output group after gates");
      const auto width = lp.number(t[2]);
      lp.expect_count(t, 3 + width, "output");
      OutputGroup g{t[1], {}};
      for (std::size_t i = 0; i < width; ++i) g.wires.push_back(static_cast<WireId>(lp.number(t[3 + i])));
      outputs.push_back(std::move(g));
    } else {
      const auto n_in = lp.number(t[0], 2);
      if (t.size() < 2 || lp.number(t[1]) != 1) lp.fail("gates have exactly one output");
      if (n_in == 1) {
        lp.expect_count(t, 5, "INV gate");
        if (t[4] != "INV") lp.fail("one-input gate must be INV, got '" + t[4] + "'");
        gates.push_back({GateKind::Inv, static_cast<WireId>(lp.number(t[2])), 0, static_cast<WireId>(lp.number(t[3]))});
      } else if (n_in == 2) {
        lp.expect_count(t, 6, "two-input gate");
        GateKind k;
        if (t[5] == "XOR") k = GateKind::Xor;
        else if (t[5] == "AND") k = GateKind::And;
        else lp.fail("unknown two-input gate '" + t[5] + "'");
        gates.push_back({k, static_cast<WireId>(lp.number(t[2])), static_cast<WireId>(lp.number(t[3])),
                         static_cast<WireId>(lp.number(t[4]))});
      } else {
        lp.fail("gate arity must be 1 or 2");
      }
      const Gate& g = gates.back();
      if (g.a >= g.out || (g.arity() == 2 && g.b >= g.out)) lp.fail("gate input does not precede its output");
    }
  }

  if (parties.size() != n_party) lp.fail("header declares " + std::to_string(n_party) + " party groups, found " + std::to_string(parties.size()));
  if (outputs.size() != n_out) lp.fail("header declares " + std::to_string(n_out) + " output groups, found " + std::to_string(outputs.size()));
  for (std::size_t i = 0; i < n_party; ++i)
    if (parties[i].width != party_widths[i]) lp.fail("party group '" + parties[i].name + "' width differs from header");
  for (std::size_t i = 0; i < n_out; ++i)
    if (outputs[i].wires.size() != out_widths[i]) lp.fail("output group '" + outputs[i].name + "' width differs from header");
  if (gates.size() != n_gates) lp.fail("header declares " + std::to_string(n_gates) + " gates, found " + std::to_string(gates.size()));

  try {
    Circuit c(std::move(parties), std::move(constants), std::move(gates), std::move(outputs));
    if (c.n_wires() != n_wires) lp.fail("header declares " + std::to_string(n_wires) + " wires, found " + std::to_string(c.n_wires()));
    return c;
  } catch (const ConfigError& e) {
    throw ParseError(std::string("circuit text: ") + e.what());
  }
}

inline Circuit read_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_text(in);
}

}  // namespace dmpc::circuit
