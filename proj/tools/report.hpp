#pragma once

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dmpc::tools {

enum class Format { Table, Jsonl, Both };

// A report is a human table plus one JSON record per row. Timing values live
// under the "timing_ms" key of each record; nothing else depends on the clock.
class Report {
 public:
  Report(std::string title, std::vector<std::string> headers) : title_(std::move(title)), headers_(std::move(headers)) {}

  void add(std::vector<std::string> cells, nlohmann::json record) {
    rows_.push_back(std::move(cells));
    records_.push_back(std::move(record));
  }

  void note(std::string line) { notes_.push_back(std::move(line)); }

  void print(std::ostream& os, Format f) const {
    if (f != Format::Jsonl) print_table(os);
    if (f != Format::Table)
      for (const auto& r : records_) os << r.dump() << '\n';
  }

 private:
  void print_table(std::ostream& os) const {
    std::vector<std::size_t> w(headers_.size());
    for (std::size_t i = 0; i < headers_.size(); ++i) w[i] = headers_[i].size();
    for (const auto& r : rows_)
      for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string& c = i < cells.size() ? cells[i] : std::string();
        os << (i ? "  " : "") << std::string(w[i] - c.size(), ' ') << c;
      }
      os << '\n';
    };
    os << "# " << title_ << '\n';
    line(headers_);
    std::size_t total = 0;
    for (auto x : w) total += x + 2;
    os << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
    for (const auto& r : rows_) line(r);
    for (const auto& n : notes_) os << "  " << n << '\n';
    os << '\n';
  }

  std::string title_;
  std::vector<std::string> headers_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<nlohmann::json> records_;
  std::vector<std::string> notes_;
};

inline std::string fmt_ms(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

inline std::string fmt_mb(std::uint64_t bytes) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3f", static_cast<double>(bytes) / (1024.0 * 1024.0));
  return b;
}

}  // namespace dmpc::tools
