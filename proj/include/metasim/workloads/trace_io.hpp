#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "metasim/workloads/trace.hpp"

namespace metasim {

// Text trace format, one record per line, decimal integers:
//
//   METASIM-TRACE 1
//   seed <n> / generator <name> / space <bytes> / param <key> <value>
//   image <addr> <size> <value>
//   expect_kind <kind> / expect_violation <pos> / expect_prefetch <addr>
//   events <count>
//   <count event lines>
//   checksum <fnv1a-64 hex of every preceding byte>
//
// The full grammar is documented in docs/trace-format.md.

inline constexpr std::string_view kTraceMagic = "METASIM-TRACE";

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace trace_detail {

inline std::string hex_bytes(const std::vector<std::uint8_t>& b) {
  if (b.empty()) return "-";
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  for (auto c : b) {
    s.push_back(kDigits[c >> 4]);
    s.push_back(kDigits[c & 15]);
  }
  return s;
}

inline void write_event(std::ostream& os, const TraceEvent& ev) {
  std::visit(
      [&os](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MemAccess>) {
          os << (e.kind == AccessKind::Load ? "L " : "S ") << e.vaddr << ' ' << e.size;
        } else if constexpr (std::is_same_v<T, CallEvent>) {
          os << "CALL " << e.ret_slot;
        } else if constexpr (std::is_same_v<T, ReturnEvent>) {
          os << "RET " << e.ret_slot;
        } else if constexpr (std::is_same_v<T, ComputeEvent>) {
          os << "C " << e.cycles;
        } else if constexpr (std::is_same_v<T, LabelEvent>) {
          os << "LABEL " << to_string(e.kind);
        } else {
          std::visit(
              [&os](const auto& op) {
                using O = std::decay_t<decltype(op)>;
                const bool un = !std::is_same_v<O, CreateOp> && op.tag.untagged();
                if constexpr (std::is_same_v<O, CreateOp>) {
                  os << "CREATE " << int{op.client.value} << ' ' << int{op.tag.value} << ' '
                     << hex_bytes(op.metadata);
                } else if constexpr (std::is_same_v<O, MapOp>) {
                  os << (un ? "UNMAP " : "MAP ");
                  if (!un) os << int{op.tag.value} << ' ';
                  os << op.vstart << ' ' << op.size;
                } else if constexpr (std::is_same_v<O, Map2DOp>) {
                  os << (un ? "UNMAP2D " : "MAP2D ");
                  if (!un) os << int{op.tag.value} << ' ';
                  os << op.vstart << ' ' << op.len_x << ' ' << op.size_x << ' ' << op.size_y;
                } else {
                  os << (un ? "UNMAP3D " : "MAP3D ");
                  if (!un) os << int{op.tag.value} << ' ';
                  os << op.vstart << ' ' << op.len_x << ' ' << op.len_y << ' ' << op.size_x << ' '
                     << op.size_y << ' ' << op.size_z;
                }
              },
              e.op);
        }
      },
      ev);
  os << '\n';
}

class LineReader {
 public:
  LineReader(std::string_view line, std::size_t line_no) : line_no_(line_no) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      const auto start = i;
      while (i < line.size() && line[i] != ' ') ++i;
      if (i > start) fields_.push_back(line.substr(start, i - start));
    }
  }

  std::size_t size() const { return fields_.size(); }
  std::string_view word(std::size_t i) const {
    if (i >= fields_.size()) fail("missing field " + std::to_string(i));
    return fields_[i];
  }

  std::uint64_t number(std::size_t i) const {
    const auto w = word(i);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || p != w.data() + w.size()) fail("bad integer '" + std::string(w) + "'");
    return v;
  }

  std::uint8_t byte(std::size_t i) const {
    const auto v = number(i);
    if (v > 255) fail("value out of 8-bit range");
    return static_cast<std::uint8_t>(v);
  }

  void expect_fields(std::size_t n) const {
    if (fields_.size() != n)
      fail("expected " + std::to_string(n) + " fields, got " + std::to_string(fields_.size()));
  }

  [[noreturn]] void fail(const std::string& what) const { throw TraceParseError(what, line_no_); }

 private:
  std::vector<std::string_view> fields_;
  std::size_t line_no_;
};

inline std::vector<std::uint8_t> parse_hex(const LineReader& r, std::string_view s) {
  std::vector<std::uint8_t> out;
  if (s == "-") return out;
  if (s.size() % 2) r.fail("odd-length hex payload");
  auto nibble = [&r](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    r.fail("bad hex digit");
  };
  for (std::size_t i = 0; i < s.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(nibble(s[i]) << 4 | nibble(s[i + 1])));
  return out;
}

inline ViolationKind parse_kind(const LineReader& r, std::string_view s) {
  if (s == to_string(ViolationKind::BoundsViolation)) return ViolationKind::BoundsViolation;
  if (s == to_string(ViolationKind::ReturnAddressOverwrite)) return ViolationKind::ReturnAddressOverwrite;
  r.fail("unknown violation kind '" + std::string(s) + "'");
}

inline TraceEvent parse_event(const LineReader& r) {
  const auto op = r.word(0);
  if (op == "L" || op == "S") {
    r.expect_fields(3);
    return MemAccess{op == "L" ? AccessKind::Load : AccessKind::Store, r.number(1),
                     static_cast<std::uint32_t>(r.number(2))};
  }
  if (op == "C") {
    r.expect_fields(2);
    return ComputeEvent{r.number(1)};
  }
  if (op == "CALL") {
    r.expect_fields(2);
    return CallEvent{r.number(1)};
  }
  if (op == "RET") {
    r.expect_fields(2);
    return ReturnEvent{r.number(1)};
  }
  if (op == "LABEL") {
    r.expect_fields(2);
    return LabelEvent{parse_kind(r, r.word(1))};
  }
  if (op == "CREATE") {
    r.expect_fields(4);
    return MetaEvent{CreateOp{ClientId{r.byte(1)}, TagId{r.byte(2)}, parse_hex(r, r.word(3))}};
  }
  const bool un = op.starts_with("UN");
  const std::size_t a = un ? 1 : 2;  // first address field
  const TagId tag = un ? kUntagged : TagId{r.byte(1)};
  if (op == "MAP" || op == "UNMAP") {
    r.expect_fields(a + 2);
    return MetaEvent{MapOp{tag, r.number(a), r.number(a + 1)}};
  }
  if (op == "MAP2D" || op == "UNMAP2D") {
    r.expect_fields(a + 4);
    return MetaEvent{Map2DOp{tag, r.number(a), r.number(a + 1), r.number(a + 2), r.number(a + 3)}};
  }
  if (op == "MAP3D" || op == "UNMAP3D") {
    r.expect_fields(a + 6);
    return MetaEvent{Map3DOp{tag, r.number(a), r.number(a + 1), r.number(a + 2), r.number(a + 3),
                             r.number(a + 4), r.number(a + 5)}};
  }
  r.fail("unknown event '" + std::string(op) + "'");
}

}  // namespace trace_detail

inline std::string serialize_trace(const Trace& t) {
  std::ostringstream os;
  os << kTraceMagic << ' ' << t.header.version << '\n';
  os << "seed " << t.header.seed << '\n';
  os << "generator " << (t.header.generator.empty() ? "-" : t.header.generator) << '\n';
  os << "space " << t.header.address_space_bytes << '\n';
  for (const auto& [k, v] : t.header.params) {
    if (k.find(' ') != std::string::npos || v.find(' ') != std::string::npos || v.empty())
      throw std::invalid_argument("trace params must be non-empty and space-free");
    os << "param " << k << ' ' << v << '\n';
  }
  for (const auto& [addr, w] : t.image.words())
    os << "image " << addr << ' ' << int{w.size} << ' ' << w.value << '\n';
  if (t.expected.violation_kind) os << "expect_kind " << to_string(*t.expected.violation_kind) << '\n';
  for (auto p : t.expected.violation_positions) os << "expect_violation " << p << '\n';
  for (auto a : t.expected.prefetch_oracle) os << "expect_prefetch " << a << '\n';
  os << "events " << t.events.size() << '\n';
  for (const auto& e : t.events) trace_detail::write_event(os, e);
  auto body = os.str();
  std::ostringstream tail;
  tail << "checksum " << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(body) << '\n';
  return body + tail.str();
}

inline Trace parse_trace(std::string_view text) {
  using trace_detail::LineReader;
  Trace t;
  std::size_t pos = 0, line_no = 0;
  std::size_t body_end = std::string_view::npos;
  std::optional<std::uint64_t> declared_events;
  bool saw_checksum = false;
  std::uint64_t checksum = 0;

  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      throw TraceParseError("unterminated final line (truncated file?)", line_no + 1);
    const auto line = text.substr(pos, nl - pos);
    const auto line_start = pos;
    pos = nl + 1;
    ++line_no;
    if (saw_checksum) throw TraceParseError("content after checksum", line_no);
    LineReader r(line, line_no);
    if (r.size() == 0) r.fail("empty line");
    const auto key = r.word(0);

    if (line_no == 1) {
      if (key != kTraceMagic) r.fail("not a metasim trace");
      r.expect_fields(2);
      t.header.version = static_cast<std::uint32_t>(r.number(1));
      if (t.header.version != 1) r.fail("unsupported trace version");
      continue;
    }
    if (declared_events && t.events.size() < *declared_events) {
      t.events.push_back(trace_detail::parse_event(r));
      continue;
    }
    if (declared_events && key != "checksum") r.fail("only the checksum may follow the events");
    if (key == "seed") {
      r.expect_fields(2);
      t.header.seed = r.number(1);
    } else if (key == "generator") {
      r.expect_fields(2);
      t.header.generator = r.word(1) == "-" ? "" : std::string(r.word(1));
    } else if (key == "space") {
      r.expect_fields(2);
      t.header.address_space_bytes = r.number(1);
    } else if (key == "param") {
      r.expect_fields(3);
      t.header.params[std::string(r.word(1))] = std::string(r.word(2));
    } else if (key == "image") {
      r.expect_fields(4);
      t.image.store(r.number(1), r.byte(2), r.number(3));
    } else if (key == "expect_kind") {
      r.expect_fields(2);
      t.expected.violation_kind = trace_detail::parse_kind(r, r.word(1));
    } else if (key == "expect_violation") {
      r.expect_fields(2);
      t.expected.violation_positions.push_back(r.number(1));
    } else if (key == "expect_prefetch") {
      r.expect_fields(2);
      t.expected.prefetch_oracle.push_back(r.number(1));
    } else if (key == "events") {
      r.expect_fields(2);
      if (declared_events) r.fail("duplicate events line");
      declared_events = r.number(1);
      t.events.reserve(*declared_events);
    } else if (key == "checksum") {
      r.expect_fields(2);
      if (!declared_events) r.fail("checksum before events");
      const auto w = r.word(1);
      const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), checksum, 16);
      if (ec != std::errc{} || p != w.data() + w.size()) r.fail("bad checksum field");
      body_end = line_start;
      saw_checksum = true;
    } else {
      r.fail("unknown header key '" + std::string(key) + "'");
    }
  }
  if (line_no == 0) throw TraceParseError("empty file", 1);
  if (!declared_events) throw TraceParseError("missing events line (truncated file?)", line_no + 1);
  if (t.events.size() < *declared_events)
    throw TraceParseError("expected " + std::to_string(*declared_events) + " events, file ends after " +
                              std::to_string(t.events.size()),
                          line_no + 1);
  if (!saw_checksum) throw TraceParseError("missing checksum line (truncated file?)", line_no + 1);
  if (fnv1a64(text.substr(0, body_end)) != checksum)
    throw TraceIntegrityError("trace checksum mismatch: header or body altered after writing");
  return t;
}

inline void trace_write(const Trace& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << serialize_trace(t);
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

inline Trace trace_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

}  // namespace metasim
