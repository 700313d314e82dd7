#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "metasim/harness/experiments.hpp"

namespace metasim {

/// Fixed-point with trailing zeros trimmed, keeping one decimal: 1.0, 1.3125.
inline std::string format_ratio(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  auto s = os.str();
  while (s.size() > 2 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

inline std::vector<std::string> csv_columns() {
  std::vector<std::string> cols = {"experiment", "trace", "variant", "sweep_param", "sweep_value", "rep", "seed"};
  for (auto f : Stats::kFieldNames) cols.emplace_back(f);
  for (const char* c : {"baseline_cycles", "normalized_time", "normalized_mean", "normalized_min", "normalized_max",
                        "mmc_hit_rate", "extra_mem_accesses", "unbound_ops", "terminated"})
    cols.emplace_back(c);
  return cols;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string format_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  const auto cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    os << detail::csv_field(r.experiment) << ',' << detail::csv_field(r.trace) << ',' << r.variant << ','
       << r.sweep_param << ',' << r.sweep_value << ',' << r.rep << ',' << r.seed;
    for (auto v : r.stats.values()) os << ',' << v;
    os << ',' << r.baseline_cycles << ',' << format_ratio(r.normalized_time()) << ','
       << format_ratio(r.normalized_mean) << ',' << format_ratio(r.normalized_min) << ','
       << format_ratio(r.normalized_max) << ',' << format_ratio(r.stats.mmc_hit_rate()) << ','
       << r.extra_mem_accesses() << ',' << r.unbound_ops << ',' << (r.terminated ? 1 : 0) << '\n';
  }
  return os.str();
}

/// One line per trap: run identity, then kind, vaddr, position, expected.
inline std::string format_trap_log(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "experiment,trace,variant,sweep_value,rep,kind,vaddr,position,expected\n";
  for (const auto& r : rows)
    for (const auto& t : r.traps)
      os << detail::csv_field(r.experiment) << ',' << detail::csv_field(r.trace) << ',' << r.variant << ','
         << r.sweep_value << ',' << r.rep << ',' << to_string(t.kind) << ',' << t.vaddr << ',' << t.position << ','
         << (t.expected ? 1 : 0) << '\n';
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw ConfigError("no rows to emit");
  write_text(path, format_csv(rows));
}

}  // namespace metasim
