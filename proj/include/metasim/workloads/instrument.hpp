#pragma once

#include <string>
#include <vector>

#include "metasim/workloads/trace.hpp"

namespace metasim {

enum class SoftwareCheck { Bounds, Canary };

namespace detail {

inline void relabel(Trace& t) {
  t.expected.violation_positions.clear();
  for (std::size_t i = 0; i + 1 < t.events.size(); ++i)
    if (std::holds_alternative<LabelEvent>(t.events[i])) t.expected.violation_positions.push_back(i + 1);
}

}  // namespace detail

/// Removes every CREATE/MAP event, leaving the program's own work.
inline Trace strip_metadata_ops(const Trace& in) {
  Trace out = in;
  std::erase_if(out.events, [](const TraceEvent& e) { return std::holds_alternative<MetaEvent>(e); });
  detail::relabel(out);
  return out;
}

/// Software-only equivalent of a safety corpus.
///
/// Bounds: each access that followed a CREATE gets `check_instructions`
/// compare/branch instructions in front of it instead. Canary: a canary
/// store after every call and a canary load plus compare before every return.
inline Trace instrument_software_checks(const Trace& in, SoftwareCheck kind, std::uint64_t check_instructions = 2) {
  const auto want = kind == SoftwareCheck::Bounds ? "safety_bounds" : "safety_rap";
  if (in.header.generator != want)
    throw ConfigError("software " + std::string(kind == SoftwareCheck::Bounds ? "bounds" : "canary") +
                      " instrumentation needs a " + want + " trace, got '" + in.header.generator + "'");
  Trace out = in;
  out.events.clear();
  out.events.reserve(in.events.size() * 2);
  constexpr Addr kCanaryOffset = 8;
  bool armed = false;
  for (const auto& e : in.events) {
    if (kind == SoftwareCheck::Bounds) {
      if (const auto* m = std::get_if<MetaEvent>(&e)) {
        armed = armed || std::holds_alternative<CreateOp>(m->op);
        continue;
      }
      if (armed && std::holds_alternative<MemAccess>(e)) {
        // Keep a label glued to its access.
        if (!out.events.empty() && std::holds_alternative<LabelEvent>(out.events.back())) {
          const auto label = out.events.back();
          out.events.back() = ComputeEvent{check_instructions};
          out.events.push_back(label);
        } else {
          out.events.push_back(ComputeEvent{check_instructions});
        }
        armed = false;
      }
      out.events.push_back(e);
    } else {
      if (const auto* r = std::get_if<ReturnEvent>(&e)) {
        out.events.push_back(MemAccess{AccessKind::Load, r->ret_slot + kCanaryOffset, 8});
        out.events.push_back(ComputeEvent{1});
      }
      out.events.push_back(e);
      if (const auto* c = std::get_if<CallEvent>(&e))
        out.events.push_back(MemAccess{AccessKind::Store, c->ret_slot + kCanaryOffset, 8});
    }
  }
  out.header.params["instrumented"] = kind == SoftwareCheck::Bounds ? "bounds" : "canary";
  detail::relabel(out);
  return out;
}

/// Puts one MAP + CREATE pair in front of every `every`-th memory access.
/// The MAP retags the 64 B around the access it precedes with tag 1.
inline Trace insert_op_density(const Trace& in, std::uint64_t every, ClientId client) {
  if (every == 0) throw ConfigError("op density interval must be >= 1");
  Trace out = in;
  out.events.clear();
  out.events.reserve(in.events.size() + 2 * (in.events.size() / every + 1));
  std::uint64_t n = 0;
  for (const auto& e : in.events) {
    if (const auto* m = std::get_if<MemAccess>(&e); m && ++n % every == 0) {
      out.events.push_back(MetaEvent{MapOp{TagId{1}, m->vaddr / 64 * 64, 64}});
      out.events.push_back(MetaEvent{CreateOp{client, TagId{1}, {1}}});
    }
    out.events.push_back(e);
  }
  out.header.params["op_every"] = std::to_string(every);
  detail::relabel(out);
  return out;
}

/// Structural problems a well-formed trace must not have. Empty when valid.
inline std::vector<std::string> validate_trace(const Trace& t) {
  std::vector<std::string> problems;
  auto report = [&](std::size_t pos, const std::string& what) {
    problems.push_back("event " + std::to_string(pos) + ": " + what);
  };
  const auto space = t.header.address_space_bytes;
  auto check_range = [&](std::size_t pos, Addr a, std::uint64_t len) {
    if (a + len > space || a + len < a) report(pos, "address range outside the address space");
  };
  std::size_t pending_ops = 0;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const auto& e = t.events[i];
    if (const auto* m = std::get_if<MemAccess>(&e)) {
      check_range(i, m->vaddr, m->size);
      pending_ops = 0;
    } else if (const auto* c = std::get_if<CallEvent>(&e)) {
      check_range(i, c->ret_slot, 8);
      pending_ops = 0;
    } else if (const auto* r = std::get_if<ReturnEvent>(&e)) {
      check_range(i, r->ret_slot, 8);
      pending_ops = 0;
    } else if (const auto* me = std::get_if<MetaEvent>(&e)) {
      ++pending_ops;
      if (const auto* cr = std::get_if<CreateOp>(&me->op)) {
        if (cr->tag.untagged()) report(i, "CREATE with reserved tag 0");
      } else {
        for (const auto& vr : decompose(me->op)) check_range(i, vr.start, vr.len);
      }
    } else if (std::holds_alternative<LabelEvent>(e)) {
      if (i + 1 >= t.events.size() || !std::holds_alternative<MemAccess>(t.events[i + 1]))
        report(i, "label not followed by a memory access");
    }
  }
  if (pending_ops > 0)
    problems.push_back(std::to_string(pending_ops) + " operator(s) at the end of the trace never bind to a load/store");
  for (auto p : t.expected.violation_positions)
    if (p == 0 || p >= t.events.size() || !std::holds_alternative<LabelEvent>(t.events[p - 1]))
      problems.push_back("expected violation position " + std::to_string(p) + " is not a labeled access");
  return problems;
}

}  // namespace metasim
